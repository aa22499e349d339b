"""Input validation helpers shared by the public entry points."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatchError, OutOfBoundsError
from .geometry import Box, Window

# Standard luma weights; inputs are scans so the exact mix is immaterial.
_LUMA = np.array([0.299, 0.587, 0.114])


def as_gray_image(img: np.ndarray) -> np.ndarray:
    """Coerce an array to a 2-D uint8 grayscale plane.

    Accepts (H, W) uint8/float arrays or (H, W, 3|4) color arrays; color is
    reduced with the usual luma weights, an alpha channel is ignored.
    """
    arr = np.asarray(img)
    if arr.ndim == 3:
        if arr.shape[2] not in (3, 4):
            raise ValueError(f"expected 3 or 4 channels, got {arr.shape[2]}")
        arr = arr[:, :, :3] @ _LUMA
    elif arr.ndim != 2:
        raise ValueError(f"expected a 2-D or 3-D image array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return arr


def check_binary_image(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError("expected a 2-D boolean plane")
    return mask


def check_feature_matrix(x: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate a (N, D) float feature matrix (a single vector is promoted)."""
    x = np.asarray(x, dtype=np.float32)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D array, got ndim={x.ndim}")
    if dim is not None and x.shape[1] != dim:
        raise DimensionMismatchError(f"expected {dim}-dimensional vectors, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains NaN or inf")
    return x


def check_window_in_bounds(w: Window, page_w: int, page_h: int) -> None:
    if w.x < 0 or w.y < 0 or w.x + w.side > page_w or w.y + w.side > page_h:
        raise OutOfBoundsError(
            f"window ({w.x},{w.y},side={w.side}) exceeds page {page_w}x{page_h}"
        )


def check_box_in_bounds(b: Box, page_w: int, page_h: int) -> None:
    if b.x < 0 or b.y < 0 or b.x2 > page_w or b.y2 > page_h:
        raise OutOfBoundsError(f"box ({b.x},{b.y},{b.w}x{b.h}) exceeds page {page_w}x{page_h}")
