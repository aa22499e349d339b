"""Shared oracles and fixture builders, all independent of the code they check."""

import json
import struct
from collections import deque

import numpy as np
from PIL import Image, ImageDraw


def walk_index_file(buf: bytes):
    """Independent index-file parser: (per-page code byte counts, window counts).

    Reimplements the layout from scratch so storage-law checks do not trust
    the engine's own reader.
    """
    pos = 0

    def u32():
        nonlocal pos
        (v,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        return v

    assert buf[:4] == b"SKDX"
    pos = 4
    assert u32() == 1
    cfg_len = u32()
    cfg = json.loads(buf[pos : pos + cfg_len].decode())
    pos += cfg_len
    assert buf[pos : pos + 4] == b"PQCB"
    pos += 4
    u32()  # codebook version
    m, k, d = u32(), u32(), u32()
    pos += 8  # seed
    pos += m * k * (d // m) * 4
    n_pages = u32()
    code_bytes, window_counts = [], []
    for _ in range(n_pages):
        u32()  # page id
        title_len = u32()
        pos += title_len
        path_len = u32()
        pos += path_len
        u32(), u32()  # width, height
        n = u32()
        pos += n * 16
        code_bytes.append(n * cfg["m"])
        window_counts.append(n)
        pos += n * cfg["m"]
    assert pos == len(buf)
    return code_bytes, window_counts


def flood_fill_component(mask: np.ndarray, start: tuple[int, int]) -> set:
    """4-connected component of `start` in a boolean plane, by BFS."""
    h, w = mask.shape
    seen = {start}
    queue = deque([start])
    while queue:
        y, x = queue.popleft()
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and (ny, nx) not in seen:
                seen.add((ny, nx))
                queue.append((ny, nx))
    return seen


def sobel_oracle(gray: np.ndarray):
    """Per-pixel gradient by explicit 3x3 Sobel with symmetric padding.

    Written long-hand (pad + shifted differences) as an independent check of
    the production gradient path. Returns (magnitude, orientation bin).
    """
    f = np.asarray(gray, dtype=np.float64) / 255.0
    p = np.pad(f, 1, mode="symmetric")
    # smooth [1,2,1] across, difference [-1,0,1] along
    gx = (
        (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    mag = np.sqrt(gx * gx + gy * gy)
    ang = np.arctan2(gy, gx)
    ang = np.where(ang < 0.0, ang + np.pi, ang)
    ang = np.where(ang >= np.pi, ang - np.pi, ang)
    quarter = np.pi / 4.0
    bins = np.floor(ang / quarter).astype(np.int64)
    exact = np.mod(ang, quarter) == 0.0
    bins = np.where(exact & (bins > 0), bins - 1, bins)
    return mag, np.clip(bins, 0, 3)


def binned_mass_oracle(gray: np.ndarray, x: int, y: int, w: int, h: int,
                       floor: float) -> np.ndarray:
    """Total edge magnitude per orientation bin over a rectangle, by loop."""
    mag, bins = sobel_oracle(gray)
    out = np.zeros(4)
    for yy in range(y, y + h):
        for xx in range(x, x + w):
            if mag[yy, xx] >= floor:
                out[bins[yy, xx]] += mag[yy, xx]
    return out


def eoh_oracle(gray: np.ndarray, x: int, y: int, side: int, cells: int,
               floor: float):
    """Reference EOH: per-pixel accumulation, then the two normalizations."""
    base = side // cells
    edges = [x + i * base for i in range(cells)] + [x + side]
    edges_y = [y + i * base for i in range(cells)] + [y + side]
    grid = np.zeros((cells, cells, 4))
    for r in range(cells):
        for c in range(cells):
            grid[r, c] = binned_mass_oracle(
                gray, edges[c], edges_y[r], edges[c + 1] - edges[c],
                edges_y[r + 1] - edges_y[r], floor,
            )
    norms = np.sqrt((grid ** 2).sum(axis=2))
    for r in range(cells):
        for c in range(cells):
            if norms[r, c] > 1e-12:
                grid[r, c] /= norms[r, c]
            else:
                grid[r, c] = 0.0
    vec = grid.reshape(-1)
    total = np.linalg.norm(vec)
    if total == 0:
        return None
    return vec / total


def scale_pattern(side: int) -> np.ndarray:
    """Scale-clean test figure: axis-aligned squares plus exact diagonals."""
    im = Image.new("L", (side, side), 255)
    d = ImageDraw.Draw(im)
    inset = side // 10
    w = max(2, side // 40)
    d.rectangle([inset, inset, side - inset - 1, side - inset - 1], outline=0, width=w)
    d.line([(inset, inset), (side - inset - 1, side - inset - 1)], fill=0, width=w)
    d.line([(side - inset - 1, inset), (inset, side - inset - 1)], fill=0, width=w)
    q = side // 4
    d.rectangle([q, q, side - q - 1, side - q - 1], outline=0, width=w)
    return np.asarray(im)


def two_frame_page(width: int = 400, height: int = 300, gutter: int = 24,
                   border: int = 5):
    """Minimal page with two framed panels split by a gutter that reaches the
    page edge; returns (page, frame boxes)."""
    page = np.full((height, width), 255, dtype=np.uint8)
    half = (width - 3 * gutter) // 2
    frames = []
    for i in range(2):
        fx = gutter + i * (half + gutter)
        fy = gutter
        fw, fh = half, height - 2 * gutter
        page[fy : fy + border, fx : fx + fw] = 0
        page[fy + fh - border : fy + fh, fx : fx + fw] = 0
        page[fy : fy + fh, fx : fx + border] = 0
        page[fy : fy + fh, fx + fw - border : fx + fw] = 0
        frames.append((fx, fy, fw, fh))
    return page, frames
