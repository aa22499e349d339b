"""Retrieval and localization metrics: PASCAL overlap, recall@k, mAP@k,
and detection-rate curves for proposal generators."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import Box, Window

OVERLAP_CUTOFF = 0.5  # a prediction counts only when IoU is strictly above this


@dataclass(frozen=True)
class GroundTruth:
    """Annotated target boxes of one page."""

    page_id: int
    boxes: tuple[Box, ...]
    label: str = ""


def overlap_ratio(bp: Box, bgt: Box) -> float:
    """Intersection over union of two boxes."""
    ix = max(0, min(bp.x2, bgt.x2) - max(bp.x, bgt.x))
    iy = max(0, min(bp.y2, bgt.y2) - max(bp.y, bgt.y))
    inter = ix * iy
    union = bp.area + bgt.area - inter
    return inter / union


def judge(
    predictions: Sequence[tuple[int, Box]], ground_truths: Iterable[GroundTruth]
) -> list[bool]:
    """True/false verdict per ranked prediction.

    A prediction is true when it overlaps (IoU > 0.5) a not-yet-matched
    ground-truth box on its own page; each ground-truth box can credit at
    most one prediction, matched greedily from the top of the ranking.
    """
    pool: dict[int, list[list]] = {}
    for gt in ground_truths:
        pool.setdefault(gt.page_id, []).extend([box, False] for box in gt.boxes)

    verdict = []
    for page_id, box in predictions:
        best, best_r = None, OVERLAP_CUTOFF
        for entry in pool.get(page_id, ()):
            if entry[1]:
                continue
            r = overlap_ratio(box, entry[0])
            if r > best_r:
                best, best_r = entry, r
        if best is not None:
            best[1] = True
        verdict.append(best is not None)
    return verdict


def recall_at_k(judged: Sequence[Sequence[bool]], k: int) -> float:
    """Fraction of queries with at least one true hit in their top k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not judged:
        return 0.0
    return sum(any(seq[:k]) for seq in judged) / len(judged)


def average_precision(judged: Sequence[bool], n_relevant: int, k: int) -> float:
    """AP truncated at rank k: mean of precision at each true hit, divided by
    the number of ground truths."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n_relevant < 1:
        return 0.0
    hits = 0
    total = 0.0
    for rank, good in enumerate(judged[:k], start=1):
        if good:
            hits += 1
            total += hits / rank
    return total / n_relevant


def map_at_k(
    judged: Sequence[Sequence[bool]], n_relevant: Sequence[int], k: int
) -> float:
    """Mean average precision over queries."""
    if len(judged) != len(n_relevant):
        raise ValueError("judged sequences and relevance counts must be parallel")
    if not judged:
        return 0.0
    return sum(
        average_precision(seq, n, k) for seq, n in zip(judged, n_relevant)
    ) / len(judged)


def detection_rate(
    proposals_by_page: dict[int, Sequence[Box]],
    ground_truths: Iterable[GroundTruth],
    budget: int,
) -> float:
    """Fraction of ground-truth boxes covered (IoU > 0.5) by the first
    `budget` proposals of their page."""
    gts = [(gt.page_id, box) for gt in ground_truths for box in gt.boxes]
    if not gts:
        return 0.0
    covered = 0
    for page_id, box in gts:
        for prop in list(proposals_by_page.get(page_id, ()))[:budget]:
            if overlap_ratio(prop, box) > OVERLAP_CUTOFF:
                covered += 1
                break
    return covered / len(gts)


def detection_rate_curve(
    proposals_by_page: dict[int, Sequence[Box]],
    ground_truths: Sequence[GroundTruth],
    budgets: Sequence[int],
) -> tuple[list[float], float]:
    """DR at each window budget plus the area under the curve.

    The AUC integrates DR over the budget axis normalized to [0, 1] by the
    largest budget, with an implicit (0, 0) starting point.
    """
    budgets = list(budgets)
    if budgets != sorted(budgets) or (budgets and budgets[0] < 1):
        raise ValueError("budgets must be ascending positive window counts")
    drs = [detection_rate(proposals_by_page, ground_truths, b) for b in budgets]
    if not budgets:
        return drs, 0.0
    xs = np.concatenate([[0.0], np.asarray(budgets, dtype=np.float64) / budgets[-1]])
    ys = np.concatenate([[0.0], drs])
    return drs, float(np.trapezoid(ys, xs))


def sliding_windows(
    page_w: int,
    page_h: int,
    min_side: int = 100,
    scale_step: float = 2.0 ** 0.5,
    overlap: float = 0.5,
    page_id: int = 0,
) -> list[Window]:
    """Plain dense-grid baseline: squares at geometric scales, fixed stride.

    Ordered by (side, y, x). Used only as the comparison point for proposal
    quality; the engine itself never scans grids.
    """
    out: list[Window] = []
    side = min_side
    max_side = min(page_w, page_h)
    while side <= max_side:
        stride = max(1, round(side * (1.0 - overlap)))
        ys = list(range(0, page_h - side + 1, stride))
        xs = list(range(0, page_w - side + 1, stride))
        if ys and ys[-1] != page_h - side:
            ys.append(page_h - side)
        if xs and xs[-1] != page_w - side:
            xs.append(page_w - side)
        for y in ys:
            for x in xs:
                out.append(Window(page_id, x, y, side))
        next_side = int(round(side * scale_step))
        side = next_side if next_side > side else side + 1
    return out


def load_ground_truth(path) -> list[GroundTruth]:
    """Read annotations: a JSON list of {page_id, label, boxes:[{x,y,w,h}]}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    out = []
    for entry in raw:
        boxes = tuple(Box(b["x"], b["y"], b["w"], b["h"]) for b in entry["boxes"])
        out.append(GroundTruth(page_id=int(entry["page_id"]), boxes=boxes,
                               label=entry.get("label", "")))
    return out


def save_ground_truth(gts: Sequence[GroundTruth], path) -> None:
    raw = [
        {
            "page_id": gt.page_id,
            "label": gt.label,
            "boxes": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in gt.boxes],
        }
        for gt in gts
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(raw, fh, indent=2)
