"""Raster primitives: binarization, morphology, labeling, oriented integrals.

Everything here is a pure function over immutable numpy planes, safe to call
concurrently on shared inputs. Grayscale pages are (H, W) uint8, binary
planes are (H, W) bool with True meaning white.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .validation import as_gray_image, check_binary_image

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

DEFAULT_BINARIZE_THRESHOLD = 128
DEFAULT_MAGNITUDE_FLOOR = 16.0 / 255.0


def binarize(img: np.ndarray, threshold: int = DEFAULT_BINARIZE_THRESHOLD) -> np.ndarray:
    """Threshold a grayscale page; a pixel is white iff luminance >= threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    return as_gray_image(img) >= threshold


def erode_white(mask: np.ndarray, radius: int = 1, iterations: int = 1) -> np.ndarray:
    """Erode the white set with a square structuring element.

    A pixel stays white iff its whole (2*radius+1)^2 neighborhood was white,
    applied `iterations` times; equivalently the black strokes thicken.
    Out-of-bounds neighbors count as white, so the page border never darkens
    by itself.
    """
    mask = check_binary_image(mask)
    if radius < 1 or iterations < 1:
        raise ValueError("radius and iterations must be >= 1")
    selem = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    return ndi.binary_erosion(mask, structure=selem, iterations=iterations, border_value=1)


@dataclass(frozen=True)
class LabelImage:
    """Connected components of a binary plane under 4-connectivity.

    Foreground components carry dense ids 0..count-1 in raster-scan order of
    their first pixel; every non-foreground pixel carries the reserved id
    `count` (unused when the whole plane is foreground).
    """

    labels: np.ndarray  # (H, W) int32
    count: int

    @property
    def background_label(self) -> int:
        return self.count

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


def label_components(mask: np.ndarray, foreground: str = "white") -> LabelImage:
    """Label 4-connected components of the chosen color.

    4-connectivity is deliberate: it stops margin regions from leaking
    through diagonal pixel gaps at frame corners.
    """
    mask = check_binary_image(mask)
    if foreground == "white":
        fg = mask
    elif foreground == "black":
        fg = ~mask
    else:
        raise ValueError(f"foreground must be 'white' or 'black', got {foreground!r}")
    labels, count = ndi.label(fg, structure=FOUR_CONNECTED)
    # scipy numbers components 1..count in raster order; shift to 0-based and
    # park the background one past the last component id.
    out = np.where(fg, labels - 1, count).astype(np.int32)
    return LabelImage(labels=out, count=int(count))


@dataclass(frozen=True)
class OrientedIntegrals:
    """Four summed-area tables of edge magnitude, one per orientation bin.

    Each plane is (H+1, W+1) with a zero top row and left column, so any
    rectangle sum is four lookups.
    """

    planes: np.ndarray  # (4, H+1, W+1) float64

    @property
    def width(self) -> int:
        return self.planes.shape[2] - 1

    @property
    def height(self) -> int:
        return self.planes.shape[1] - 1

    def box_sums(self, x: int, y: int, w: int, h: int) -> np.ndarray:
        """Summed magnitude per orientation bin over [x, x+w) x [y, y+h)."""
        p = self.planes
        return p[:, y + h, x + w] - p[:, y, x + w] - p[:, y + h, x] + p[:, y, x]


def gradient_orientation_bins(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel Sobel gradient magnitude and 4-level orientation bin.

    Works on luminance scaled to [0, 1]. The gradient direction is folded to
    [0, 180) and split into 45-degree bins; an angle landing exactly on a
    45/90/135 boundary is assigned to the lower-indexed bin, and 180 folds
    back to 0.
    """
    f = as_gray_image(gray).astype(np.float64) / 255.0
    gx = ndi.sobel(f, axis=1, mode="reflect")
    gy = ndi.sobel(f, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)

    ang = np.arctan2(gy, gx)
    ang = np.where(ang < 0.0, ang + np.pi, ang)
    ang = np.where(ang >= np.pi, ang - np.pi, ang)
    quarter = np.pi / 4.0
    bins = np.floor(ang / quarter).astype(np.int8)
    on_boundary = np.mod(ang, quarter) == 0.0
    bins = np.where(on_boundary & (bins > 0), bins - 1, bins)
    bins = np.clip(bins, 0, 3)
    return mag, bins


def oriented_integrals(
    img: np.ndarray, magnitude_floor: float = DEFAULT_MAGNITUDE_FLOOR
) -> OrientedIntegrals:
    """Build the four orientation-binned summed-area tables for a page.

    Pixels whose gradient magnitude falls below `magnitude_floor` contribute
    nothing; every other pixel adds its full magnitude to exactly one bin.
    """
    mag, bins = gradient_orientation_bins(img)
    keep = mag >= magnitude_floor
    h, w = mag.shape
    planes = np.zeros((4, h + 1, w + 1), dtype=np.float64)
    for b in range(4):
        contrib = np.where(keep & (bins == b), mag, 0.0)
        np.cumsum(contrib, axis=0, out=contrib)
        np.cumsum(contrib, axis=1, out=contrib)
        planes[b, 1:, 1:] = contrib
    return OrientedIntegrals(planes=planes)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Light Gaussian smoothing, returned as float64 on the 0..255 scale."""
    f = as_gray_image(img).astype(np.float64)
    if sigma <= 0:
        return f
    return ndi.gaussian_filter(f, sigma=sigma, mode="reflect")
