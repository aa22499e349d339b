"""Edge-orientation-histogram description of square windows.

A window is split into a c x c grid; each cell keeps the summed edge
magnitude of four orientation bins, read in O(1) from the page's oriented
integral planes. Cells are L2-normalized individually (so stroke density
cancels out), then the concatenated 4c^2 vector is renormalized as a whole.
Because a window of any side collapses onto the same grid, the descriptor is
insensitive to scale, which is what lets a small sketch match a large drawn
region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Window
from .raster import DEFAULT_MAGNITUDE_FLOOR, OrientedIntegrals, oriented_integrals
from .validation import as_gray_image, check_window_in_bounds

DEFAULT_CELLS = 8
DEFAULT_INK_THRESHOLD = 250  # anti-aliased canvas strokes still count as ink
DEFAULT_MIN_QUERY_SIDE = 64

_CELL_NORM_EPS = 1e-12


def feature_dim(cells: int) -> int:
    return 4 * cells * cells


@dataclass(frozen=True)
class PageFeatures:
    """Windows of one page with their descriptors, kept parallel."""

    page_id: int
    windows: list[Window]
    features: np.ndarray  # (N, 4c^2) float32

    def __post_init__(self):
        if len(self.windows) != self.features.shape[0]:
            raise ValueError("windows and features must be parallel")


def cell_edges(origin: int, side: int, cells: int) -> np.ndarray:
    """Grid line coordinates; remainder pixels go to the last row/column."""
    base = side // cells
    edges = origin + base * np.arange(cells + 1, dtype=np.int64)
    edges[cells] = origin + side
    return edges


def extract_eoh(
    integrals: OrientedIntegrals, w: Window, cells: int = DEFAULT_CELLS
) -> np.ndarray | None:
    """Describe one window; None when it contains no edge mass at all."""
    if cells < 1:
        raise ValueError(f"cells must be >= 1, got {cells}")
    if w.side < cells:
        raise ValueError(f"window side {w.side} is smaller than the {cells}-cell grid")
    check_window_in_bounds(w, integrals.width, integrals.height)

    gx = cell_edges(w.x, w.side, cells)
    gy = cell_edges(w.y, w.side, cells)
    corner = integrals.planes[:, gy][:, :, gx]  # (4, c+1, c+1)
    sums = corner[:, 1:, 1:] - corner[:, :-1, 1:] - corner[:, 1:, :-1] + corner[:, :-1, :-1]

    # Differencing the summed-area tables leaves cancellation noise where the
    # true cell sum is zero; normalizing would blow that noise up to unit
    # scale, so clamp and threshold relative to the table's magnitude.
    sums = np.maximum(sums, 0.0)
    eps = max(_CELL_NORM_EPS, 1e-9 * float(np.max(integrals.planes[:, -1, -1])))
    norms = np.sqrt((sums * sums).sum(axis=0))  # (c, c)
    nonzero = norms > eps
    if not nonzero.any():
        return None
    sums = np.where(nonzero, sums / np.where(nonzero, norms, 1.0), 0.0)

    vec = sums.transpose(1, 2, 0).ravel()  # cell-major: row, column, then bin
    vec = vec / np.sqrt(vec @ vec)
    return vec.astype(np.float32)


def describe_windows(
    integrals: OrientedIntegrals, windows: list[Window], cells: int = DEFAULT_CELLS
) -> PageFeatures:
    """Describe many windows of one page, dropping the all-zero ones."""
    kept: list[Window] = []
    feats: list[np.ndarray] = []
    for w in windows:
        f = extract_eoh(integrals, w, cells)
        if f is not None:
            kept.append(w)
            feats.append(f)
    page_id = windows[0].page_id if windows else -1
    mat = (
        np.stack(feats) if feats else np.empty((0, feature_dim(cells)), dtype=np.float32)
    )
    return PageFeatures(page_id=page_id, windows=kept, features=mat)


def ink_bounding_square(
    canvas: np.ndarray,
    ink_threshold: int = DEFAULT_INK_THRESHOLD,
    min_side: int = DEFAULT_MIN_QUERY_SIDE,
) -> Window | None:
    """Square query window around the sketched ink, or None for a blank canvas.

    The ink bounding box grows to a centered square (floored at `min_side` so
    a few stray pixels still get a meaningful grid), clamped to the canvas.
    """
    gray = as_gray_image(canvas)
    ink = gray < ink_threshold
    if not ink.any():
        return None
    ys, xs = np.nonzero(ink)
    x1, x2 = int(xs.min()), int(xs.max()) + 1
    y1, y2 = int(ys.min()), int(ys.max()) + 1
    h, w = gray.shape
    side = max(x2 - x1, y2 - y1, min_side)
    side = min(side, w, h)
    x = (x1 + x2 - side) // 2
    y = (y1 + y2 - side) // 2
    x = max(0, min(x, w - side))
    y = max(0, min(y, h - side))
    return Window(page_id=-1, x=x, y=y, side=side)


def sketch_to_feature(
    canvas: np.ndarray,
    cells: int = DEFAULT_CELLS,
    ink_threshold: int = DEFAULT_INK_THRESHOLD,
    magnitude_floor: float = DEFAULT_MAGNITUDE_FLOOR,
    min_side: int = DEFAULT_MIN_QUERY_SIDE,
) -> np.ndarray | None:
    """Descriptor for a black-on-white sketch canvas; None if blank."""
    w = ink_bounding_square(canvas, ink_threshold, min_side=max(min_side, cells))
    if w is None:
        return None
    integrals = oriented_integrals(canvas, magnitude_floor)
    return extract_eoh(integrals, w, cells)


def feature_grid(feature: np.ndarray, cells: int = DEFAULT_CELLS) -> list:
    """Nested [row][col][bin] view of a descriptor, for visualization dumps."""
    arr = np.asarray(feature, dtype=np.float64).reshape(cells, cells, 4)
    return [[list(map(float, cell)) for cell in row] for row in arr]
