"""Margin labeling: find the inter-frame white space of a page.

Pipeline: binarize, erode the white set so strokes thicken and small gaps
close, label the white 4-connected components, then pick the component that
occurs most often along the page border. That component (outer area plus the
gutters that drain into it) is the margin; windows dominated by it carry no
content and are skipped before feature extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import raster
from .exceptions import OutOfBoundsError
from .geometry import Window

DEFAULT_MARGIN_THRESHOLD = 0.1


@dataclass(frozen=True)
class MarginConfig:
    binarize_threshold: int = raster.DEFAULT_BINARIZE_THRESHOLD
    erosion_radius: int = 1
    erosion_iterations: int = 2
    border_width: int = 1  # band sampled for the most-frequent label vote


@dataclass(frozen=True)
class MarginMask:
    """Boolean margin plane plus its summed-area table.

    `degenerate` flags pages where no white pixel survived erosion (e.g. an
    all-black scan); the mask is then all False and nothing gets skipped.
    """

    mask: np.ndarray  # (H, W) bool
    integral: np.ndarray = field(repr=False, default=None)  # (H+1, W+1) int64
    degenerate: bool = False

    def __post_init__(self):
        if self.integral is None:
            integ = np.zeros(
                (self.mask.shape[0] + 1, self.mask.shape[1] + 1), dtype=np.int64
            )
            np.cumsum(self.mask, axis=0, out=integ[1:, 1:])
            np.cumsum(integ[1:, 1:], axis=1, out=integ[1:, 1:])
            object.__setattr__(self, "integral", integ)

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    def count_in(self, x: int, y: int, w: int, h: int) -> int:
        p = self.integral
        return int(p[y + h, x + w] - p[y, x + w] - p[y + h, x] + p[y, x])


def compute_margin_mask(page: np.ndarray, cfg: MarginConfig = MarginConfig()) -> MarginMask:
    """Label the margin pixels of a page.

    Returns a degenerate (all-False) mask if erosion leaves no white pixel,
    rather than guessing at a margin.
    """
    white = raster.binarize(page, cfg.binarize_threshold)
    eroded = raster.erode_white(white, cfg.erosion_radius, cfg.erosion_iterations)
    if not eroded.any():
        return MarginMask(mask=np.zeros_like(eroded), degenerate=True)

    labeled = raster.label_components(eroded, foreground="white")
    bw = max(1, min(cfg.border_width, labeled.height, labeled.width))
    border = np.concatenate(
        [
            labeled.labels[:bw, :].ravel(),
            labeled.labels[-bw:, :].ravel(),
            labeled.labels[:, :bw].ravel(),
            labeled.labels[:, -bw:].ravel(),
        ]
    )
    border = border[border != labeled.background_label]
    if border.size == 0:
        # White survived somewhere, but the whole border band is black: no
        # component reaches the page edge, so no margin can be identified.
        return MarginMask(mask=np.zeros_like(eroded), degenerate=True)
    counts = np.bincount(border, minlength=labeled.count)
    margin_label = int(np.argmax(counts))  # ties resolve to the lowest id
    return MarginMask(mask=labeled.labels == margin_label)


def margin_ratio(mask: MarginMask, w: Window) -> float:
    """Fraction of a window covered by margin, U/S with S = side^2.

    O(1) via the mask's summed-area table.
    """
    if w.x < 0 or w.y < 0 or w.x + w.side > mask.width or w.y + w.side > mask.height:
        raise OutOfBoundsError(
            f"window ({w.x},{w.y},side={w.side}) exceeds page {mask.width}x{mask.height}"
        )
    return mask.count_in(w.x, w.y, w.side, w.side) / float(w.side * w.side)


def mask_to_rgba(page: np.ndarray, mask: MarginMask) -> np.ndarray:
    """Debug overlay: the page with margin pixels tinted green."""
    gray = raster.as_gray_image(page)
    out = np.stack([gray, gray, gray, np.full_like(gray, 255)], axis=-1)
    out[mask.mask, 0] //= 2
    out[mask.mask, 1] = 200
    out[mask.mask, 2] //= 2
    return out
