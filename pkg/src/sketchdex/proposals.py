"""Candidate object windows for a page.

The page is over-segmented with a graph-based merge (Felzenszwalb-style
predicate on a 4-connected grid), then regions are greedily merged most
similar pair first, selective-search fashion; every region seen along the
way contributes its bounding box as a proposal. Long boxes are cut into
overlapping squares, and squares that are too small or sit mostly on margin
are dropped.

Similarity uses only size, fill, and a grayscale gradient-orientation
texture histogram; the pages this system indexes carry no color.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage as ndi

from .geometry import Box, Window
from .margins import DEFAULT_MARGIN_THRESHOLD, MarginMask, margin_ratio
from .raster import LabelImage, gaussian_blur
from .validation import as_gray_image, check_box_in_bounds

DEFAULT_MIN_SIDE = 100

_TEXTURE_BINS = 8  # orientation bins; one extra bin collects near-flat pixels
_TEXTURE_FLOOR = 16.0  # gradient magnitude on the 0..255 scale


@dataclass(frozen=True)
class ProposalConfig:
    segment_k: float = 300.0
    segment_min_region: int = 50
    blur_sigma: float = 0.8
    aspect_limit: float = 1.5
    overlap: float = 0.5
    max_proposals: int = 1000


@njit(cache=True)
def _merge_components(order, eu, ev, weights, n, k_param, min_region):
    """Kruskal-style region growing with the adaptive merge predicate,
    then a second pass absorbing undersized components."""
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    thresh = np.full(n, k_param, dtype=np.float64)

    for i in range(order.shape[0]):
        e = order[i]
        a = eu[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        w = weights[e]
        if w <= thresh[a] and w <= thresh[b]:
            root = a if a < b else b
            other = b if a < b else a
            parent[other] = root
            size[root] = size[a] + size[b]
            thresh[root] = w + k_param / size[root]

    for i in range(order.shape[0]):
        e = order[i]
        a = eu[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b and (size[a] < min_region or size[b] < min_region):
            root = a if a < b else b
            other = b if a < b else a
            parent[other] = root
            size[root] = size[a] + size[b]

    roots = np.empty(n, dtype=np.int64)
    for v in range(n):
        a = v
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        roots[v] = a
    return roots


def segment(page: np.ndarray, k: float = 300.0, min_region: int = 50) -> LabelImage:
    """Graph-based over-segmentation into 4-connected regions.

    Expects the page already lightly blurred (the proposer does this); edge
    weights are absolute intensity differences on the 0..255 scale.
    """
    plane = np.asarray(page, dtype=np.float64)
    if plane.ndim != 2:
        plane = as_gray_image(page).astype(np.float64)
    h, w = plane.shape
    n = h * w
    flat = plane.ravel()

    idx = np.arange(n, dtype=np.int64).reshape(h, w)
    eu = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    ev = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    weights = np.abs(flat[eu] - flat[ev])
    order = np.argsort(weights, kind="stable")

    roots = _merge_components(order, eu, ev, weights, n, float(k), int(min_region))
    # Root ids are minimal vertex ids, i.e. first raster-order occurrence, so
    # np.unique yields a dense, deterministic relabeling.
    _, labels = np.unique(roots, return_inverse=True)
    count = int(labels.max()) + 1
    return LabelImage(labels=labels.reshape(h, w).astype(np.int32), count=count)


def _region_stats(labels: np.ndarray, count: int, blurred: np.ndarray):
    """Per-region size, bbox, and texture histogram, all vectorized."""
    flat = labels.ravel().astype(np.int64)
    sizes = np.bincount(flat, minlength=count)

    h, w = labels.shape
    ys, xs = np.divmod(np.arange(flat.size, dtype=np.int64), w)
    order = np.argsort(flat, kind="stable")
    starts = np.searchsorted(flat[order], np.arange(count))
    x_sorted = xs[order]
    y_sorted = ys[order]
    x1 = np.minimum.reduceat(x_sorted, starts)
    x2 = np.maximum.reduceat(x_sorted, starts)
    y1 = np.minimum.reduceat(y_sorted, starts)
    y2 = np.maximum.reduceat(y_sorted, starts)
    bboxes = np.stack([x1, y1, x2 + 1, y2 + 1], axis=1)  # x1, y1, x2, y2

    gx = ndi.sobel(blurred, axis=1, mode="reflect")
    gy = ndi.sobel(blurred, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    ang = np.where(ang < 0.0, ang + np.pi, ang)
    ang = np.where(ang >= np.pi, ang - np.pi, ang)
    tbin = np.minimum((ang / (np.pi / _TEXTURE_BINS)).astype(np.int64), _TEXTURE_BINS - 1)
    tbin[mag < _TEXTURE_FLOOR] = _TEXTURE_BINS
    hist = np.bincount(
        flat * (_TEXTURE_BINS + 1) + tbin.ravel(), minlength=count * (_TEXTURE_BINS + 1)
    ).reshape(count, _TEXTURE_BINS + 1).astype(np.float64)
    return sizes.astype(np.int64), bboxes.astype(np.int64), hist


def _as_box(bb: tuple[int, int, int, int]) -> Box:
    return Box(bb[0], bb[1], bb[2] - bb[0], bb[3] - bb[1])


def _adjacency(labels: np.ndarray, count: int) -> list[set[int]]:
    left, right = labels[:, :-1].ravel(), labels[:, 1:].ravel()
    up, down = labels[:-1, :].ravel(), labels[1:, :].ravel()
    a = np.concatenate([left, up]).astype(np.int64)
    b = np.concatenate([right, down]).astype(np.int64)
    differ = a != b
    lo = np.minimum(a[differ], b[differ])
    hi = np.maximum(a[differ], b[differ])
    pairs = np.unique(lo * count + hi)
    neighbors: list[set[int]] = [set() for _ in range(count)]
    for code in pairs:
        i, j = int(code) // count, int(code) % count
        neighbors[i].add(j)
        neighbors[j].add(i)
    return neighbors


def propose_regions(
    page: np.ndarray,
    cfg: ProposalConfig = ProposalConfig(),
    trace: list | None = None,
) -> list[Box]:
    """Candidate bounding boxes from hierarchical region merging.

    Emits every initial region's box and every merged region's box, deduped
    in creation order, truncated to cfg.max_proposals. When `trace` is a
    list, every merge appends (merged box, parent box, parent box) to it.
    """
    gray = as_gray_image(page)
    blurred = gaussian_blur(gray, cfg.blur_sigma)
    seg = segment(blurred, cfg.segment_k, cfg.segment_min_region)
    labels, count = seg.labels, seg.count
    im_size = float(labels.size)

    sizes_arr, bboxes_arr, hist_arr = _region_stats(labels, count, blurred)
    sizes = [int(s) for s in sizes_arr]
    bboxes = [tuple(int(v) for v in bb) for bb in bboxes_arr]
    hists = [hist_arr[i] for i in range(count)]
    neighbors = _adjacency(labels, count)
    alive = [True] * count

    def similarity(i: int, j: int) -> float:
        s_size = 1.0 - (sizes[i] + sizes[j]) / im_size
        bx1 = min(bboxes[i][0], bboxes[j][0])
        by1 = min(bboxes[i][1], bboxes[j][1])
        bx2 = max(bboxes[i][2], bboxes[j][2])
        by2 = max(bboxes[i][3], bboxes[j][3])
        s_fill = 1.0 - ((bx2 - bx1) * (by2 - by1) - sizes[i] - sizes[j]) / im_size
        hi, hj = hists[i], hists[j]
        s_tex = float(np.minimum(hi / hi.sum(), hj / hj.sum()).sum())
        return s_size + s_fill + s_tex

    heap: list[tuple[float, int, int]] = []
    for i in range(count):
        for j in neighbors[i]:
            if i < j:
                heap.append((-similarity(i, j), i, j))
    heapq.heapify(heap)

    emitted: list[tuple[int, int, int, int]] = list(bboxes)
    while heap:
        _, a, b = heapq.heappop(heap)
        if not (alive[a] and alive[b]):
            continue
        c = len(sizes)
        alive[a] = alive[b] = False
        sizes.append(sizes[a] + sizes[b])
        hists.append(hists[a] + hists[b])
        merged = (
            min(bboxes[a][0], bboxes[b][0]),
            min(bboxes[a][1], bboxes[b][1]),
            max(bboxes[a][2], bboxes[b][2]),
            max(bboxes[a][3], bboxes[b][3]),
        )
        bboxes.append(merged)
        emitted.append(merged)
        if trace is not None:
            trace.append((_as_box(merged), _as_box(bboxes[a]), _as_box(bboxes[b])))
        nbrs = {n for n in (neighbors[a] | neighbors[b]) if alive[n]}
        neighbors.append(nbrs)
        alive.append(True)
        for n in nbrs:
            neighbors[n].discard(a)
            neighbors[n].discard(b)
            neighbors[n].add(c)
            heapq.heappush(heap, (-similarity(n, c), n, c))

    seen: set[tuple[int, int, int, int]] = set()
    out: list[Box] = []
    for bb in emitted:
        if bb in seen:
            continue
        seen.add(bb)
        out.append(Box(bb[0], bb[1], bb[2] - bb[0], bb[3] - bb[1]))
        if len(out) >= cfg.max_proposals:
            break
    return out


def squarify(
    b: Box,
    page_w: int,
    page_h: int,
    aspect_limit: float = 1.5,
    overlap: float = 0.5,
    page_id: int = 0,
) -> list[Window]:
    """Square windows covering a box.

    A box within the aspect limit becomes one square of its longer side,
    centered and clamped into the page (large near-border boxes are clamped
    rather than discarded). An elongated box is tiled along its long axis
    with squares of the shorter side at the given overlap.
    """
    check_box_in_bounds(b, page_w, page_h)
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    long_side, short_side = max(b.w, b.h), min(b.w, b.h)

    if long_side / short_side <= aspect_limit:
        side = min(long_side, page_w, page_h)
        x = b.x + (b.w - side) // 2
        y = b.y + (b.h - side) // 2
        x = max(0, min(x, page_w - side))
        y = max(0, min(y, page_h - side))
        return [Window(page_id, x, y, side)]

    side = short_side
    stride = max(1, round(side * (1.0 - overlap)))
    offsets = list(range(0, long_side - side + 1, stride))
    if offsets[-1] != long_side - side:
        offsets.append(long_side - side)
    ws = []
    for off in offsets:
        if b.w >= b.h:
            ws.append(Window(page_id, b.x + off, b.y, side))
        else:
            ws.append(Window(page_id, b.x, b.y + off, side))
    return ws


def filter_windows(
    windows: list[Window],
    mask: MarginMask,
    min_side: int = DEFAULT_MIN_SIDE,
    margin_threshold: float = DEFAULT_MARGIN_THRESHOLD,
) -> list[Window]:
    """Keep windows that are big enough and not dominated by margin."""
    return [
        w
        for w in windows
        if w.side >= min_side and margin_ratio(mask, w) < margin_threshold
    ]


class WindowProposer:
    """Page-to-windows pipeline with a fixed configuration.

    Combines proposal generation, squarification, and size/margin filtering;
    the emitted list is deduplicated and sorted by (y, x, side) so one page
    and one configuration always yield one window list.
    """

    def __init__(
        self,
        cfg: ProposalConfig = ProposalConfig(),
        min_side: int = DEFAULT_MIN_SIDE,
        margin_threshold: float = DEFAULT_MARGIN_THRESHOLD,
    ):
        self.cfg = cfg
        self.min_side = min_side
        self.margin_threshold = margin_threshold

    def propose(self, page: np.ndarray, mask: MarginMask, page_id: int = 0) -> list[Window]:
        gray = as_gray_image(page)
        h, w = gray.shape
        boxes = propose_regions(gray, self.cfg)
        windows: list[Window] = []
        for b in boxes:
            windows.extend(
                squarify(b, w, h, self.cfg.aspect_limit, self.cfg.overlap, page_id)
            )
        kept = filter_windows(windows, mask, self.min_side, self.margin_threshold)
        return sorted(set(kept), key=Window.sort_key)
