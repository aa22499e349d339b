"""Deterministic synthetic line-art corpora.

Real page scans are licensed, so the test suite and the demo command draw
their own: framed pages with one distinctive connected stroke figure
("glyph") per page, plus margin-heavy multi-frame pages for exercising the
margin labeler. Everything is seeded by the glyph or page number alone, so
a glyph can be re-rendered at any size as a clean query.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .evalkit import GroundTruth, save_ground_truth
from .geometry import Box

_GLYPH_SEED = 777
_PAGE_SEED = 90210

Segment = tuple[tuple[float, float], tuple[float, float]]


def glyph_segments(index: int) -> list[Segment]:
    """Stroke segments of glyph `index`, in [0, 1] x [0, 1] coordinates.

    Each glyph is one connected figure: a regular polygon outline, a few
    chords, and optionally an inner polygon tied to the outline by spokes.
    Vertex count, rotation, and chord pattern all derive from the index.
    """
    rng = np.random.default_rng(np.random.SeedSequence([_GLYPH_SEED, int(index)]))
    n = 3 + index % 8
    rot = rng.uniform(0.0, 2.0 * np.pi)
    angles = rot + 2.0 * np.pi * np.arange(n) / n
    outer = np.stack([0.5 + 0.48 * np.cos(angles), 0.5 + 0.48 * np.sin(angles)], axis=1)

    segs: list[Segment] = []
    for i in range(n):
        segs.append((tuple(outer[i]), tuple(outer[(i + 1) % n])))

    n_chords = 1 + (index // 8) % 3
    for _ in range(n_chords):
        i = int(rng.integers(n))
        j = (i + 2 + int(rng.integers(max(1, n - 3)))) % n
        if i != j:
            segs.append((tuple(outer[i]), tuple(outer[j])))

    if (index // 2) % 2 == 0:
        inner_rot = rot + np.pi / n + rng.uniform(-0.3, 0.3)
        inner_angles = inner_rot + 2.0 * np.pi * np.arange(n) / n
        scale = 0.22 + 0.08 * ((index // 4) % 3)
        inner = np.stack(
            [0.5 + scale * np.cos(inner_angles), 0.5 + scale * np.sin(inner_angles)],
            axis=1,
        )
        for i in range(n):
            segs.append((tuple(inner[i]), tuple(inner[(i + 1) % n])))
        for i in range(0, n, max(1, n // 2)):
            segs.append((tuple(outer[i]), tuple(inner[i])))
    return segs


def render_glyph(index: int, side: int, pad: int | None = None) -> np.ndarray:
    """Draw glyph `index` black-on-white into a side x side canvas."""
    if pad is None:
        pad = max(4, side // 20)
    width = max(2, round(side * 0.02))
    im = Image.new("L", (side, side), color=255)
    draw = ImageDraw.Draw(im)
    span = side - 2 * pad
    for (x1, y1), (x2, y2) in glyph_segments(index):
        draw.line(
            [(pad + x1 * span, pad + y1 * span), (pad + x2 * span, pad + y2 * span)],
            fill=0,
            width=width,
        )
    return np.asarray(im)


def ink_box(canvas: np.ndarray, threshold: int = 250) -> Box:
    ys, xs = np.nonzero(np.asarray(canvas) < threshold)
    if xs.size == 0:
        raise ValueError("canvas holds no ink")
    return Box(int(xs.min()), int(ys.min()),
               int(xs.max()) - int(xs.min()) + 1, int(ys.max()) - int(ys.min()) + 1)


def _paste_ink(page: np.ndarray, stamp: np.ndarray, x: int, y: int) -> None:
    h, w = stamp.shape
    region = page[y : y + h, x : x + w]
    np.minimum(region, stamp, out=region)


def _draw_rect_outline(page: np.ndarray, box: Box, thickness: int) -> None:
    page[box.y : box.y + thickness, box.x : box.x2] = 0
    page[box.y2 - thickness : box.y2, box.x : box.x2] = 0
    page[box.y : box.y2, box.x : box.x + thickness] = 0
    page[box.y : box.y2, box.x2 - thickness : box.x2] = 0


def _draw_decoy(page: np.ndarray, index: int, x: int, y: int, side: int) -> None:
    im = Image.new("L", (side, side), color=255)
    draw = ImageDraw.Draw(im)
    if index % 2 == 0:
        draw.ellipse([6, 6, side - 7, side - 7], outline=0, width=3)
    else:
        draw.rectangle([6, 6, side - 7, side - 7], outline=0, width=3)
        draw.line([(6, 6), (side - 7, side - 7)], fill=0, width=3)
    _paste_ink(page, np.asarray(im), x, y)


def make_glyph_page(
    index: int, page_side: int = 512, frame_inset: int = 16, frame_thickness: int = 4
) -> tuple[np.ndarray, Box]:
    """One framed page holding glyph `index`; returns (page, glyph ink box)."""
    rng = np.random.default_rng(np.random.SeedSequence([_PAGE_SEED, int(index)]))
    page = np.full((page_side, page_side), 255, dtype=np.uint8)
    frame = Box(frame_inset, frame_inset, page_side - 2 * frame_inset,
                page_side - 2 * frame_inset)
    _draw_rect_outline(page, frame, frame_thickness)

    glyph_side = int(rng.integers(150, 261))
    interior = frame_inset + frame_thickness + 10
    hi = page_side - interior - glyph_side
    # Keep the glyph in the central area so corner decoys never collide.
    lo = interior + 70
    hi = max(lo + 1, hi - 70)
    gx = int(rng.integers(lo, hi))
    gy = int(rng.integers(lo, hi))
    stamp = render_glyph(index, glyph_side)
    _paste_ink(page, stamp, gx, gy)
    gb = ink_box(stamp)

    corner = index % 4
    decoy_side = 56
    cx = interior + 4 if corner in (0, 2) else page_side - interior - decoy_side - 4
    cy = interior + 4 if corner in (0, 1) else page_side - interior - decoy_side - 4
    _draw_decoy(page, index, cx, cy, decoy_side)

    return page, Box(gx + gb.x, gy + gb.y, gb.w, gb.h)


# At most four frames per page: the margin oracle tolerates only the thin
# erosion band along frame borders, so total border length stays bounded.
_MARGIN_LAYOUTS = [(2, 2), (1, 2), (2, 1), (1, 1)]


def make_margin_page(
    index: int, width: int = 1600, height: int = 2240
) -> tuple[np.ndarray, np.ndarray, list[Box]]:
    """Multi-frame page plus its constructed margin oracle.

    Margin is, by construction, every pixel outside all frame rectangles:
    the outer band and the gutters, all of which reach the page edge.
    Returns (page, oracle mask, frame boxes).
    """
    rows, cols = _MARGIN_LAYOUTS[index % len(_MARGIN_LAYOUTS)]
    rng = np.random.default_rng(np.random.SeedSequence([_PAGE_SEED, 5000 + int(index)]))
    page = np.full((height, width), 255, dtype=np.uint8)
    gutter = 26
    frames: list[Box] = []
    cell_w = (width - gutter * (cols + 1)) // cols
    cell_h = (height - gutter * (rows + 1)) // rows
    for r in range(rows):
        for c in range(cols):
            fx = gutter + c * (cell_w + gutter)
            fy = gutter + r * (cell_h + gutter)
            frame = Box(fx, fy, cell_w, cell_h)
            frames.append(frame)
            _draw_rect_outline(page, frame, 5)
            # Frame content: a glyph well clear of the border.
            inset = 30
            avail = min(cell_w, cell_h) - 2 * inset
            if avail > 80:
                side = int(avail * (0.5 + 0.3 * rng.random()))
                gx = fx + inset + int(rng.integers(0, max(1, cell_w - 2 * inset - side)))
                gy = fy + inset + int(rng.integers(0, max(1, cell_h - 2 * inset - side)))
                _paste_ink(page, render_glyph(200 + index * 7 + r * 3 + c, side), gx, gy)

    oracle = np.ones((height, width), dtype=bool)
    for f in frames:
        oracle[f.y : f.y2, f.x : f.x2] = False
    return page, oracle, frames


def write_glyph_corpus(
    out_dir, n_pages: int = 200, page_side: int = 512, title: str = "glyphs"
) -> tuple[list[tuple[str, str]], list[GroundTruth]]:
    """Write pages + ground-truth JSON; returns build inputs and annotations.

    Page ids in the annotations match the sorted-path order the engine
    assigns at build time.
    """
    root = Path(out_dir) / title
    root.mkdir(parents=True, exist_ok=True)
    inputs = []
    gts = []
    for i in range(n_pages):
        page, gt_box = make_glyph_page(i, page_side)
        path = root / f"page_{i:04d}.png"
        Image.fromarray(page).save(path)
        inputs.append((str(path.resolve()), title))
        gts.append(GroundTruth(page_id=i, boxes=(gt_box,), label=f"glyph_{i:04d}"))
    save_ground_truth(gts, Path(out_dir) / "gt.json")
    return inputs, gts


def write_query_sketches(out_dir, indices, side: int = 256) -> list[str]:
    """Clean re-renders of glyphs, named to match their ground-truth labels."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in indices:
        path = root / f"glyph_{i:04d}.png"
        Image.fromarray(render_glyph(i, side)).save(path)
        paths.append(str(path))
    return paths


def corpus_manifest(inputs: list[tuple[str, str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([{"path": p, "title": t} for p, t in inputs], fh, indent=2)
