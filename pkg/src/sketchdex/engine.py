"""End-to-end engine: offline index build, persistence, and query search.

An index is a trained codebook plus, per page, the square windows that
survived margin filtering and their byte codes. Search tabulates the query
once, accumulates code distances over every page, keeps each page's best
window, and ranks pages by that best distance; a window-level mode returns
the global top windows instead, which the localization evaluation needs.

Index file layout (all little-endian):

    magic "SKDX" | version u32 | cfg_len u32 | cfg JSON (sorted keys)
    codebook blob ("PQCB" header + float32 centroids)
    page_count u32
    per page: page_id u32 | title_len u32 + utf8 | path_len u32 + utf8
              | width u32 | height u32 | n_windows u32
              | n_windows x (x, y, side, reserved) u32 | n_windows * m code bytes
"""

from __future__ import annotations

import dataclasses
import json
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.base import BaseEstimator

from . import eoh, margins, proposals, raster
from .exceptions import (
    BlankRegionError,
    CorruptIndexError,
    DimensionMismatchError,
    EmptyIndexError,
    InsufficientSamplesError,
    OutOfBoundsError,
    PageNotFoundError,
    SketchdexError,
)
from .geometry import Box, SearchHit, Window
from .pq import ProductQuantizer, adc_distances, adc_scan
from .validation import as_gray_image, check_feature_matrix

INDEX_MAGIC = b"SKDX"
INDEX_VERSION = 1

_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class IndexConfig:
    """Every knob of the offline pipeline; serialized into the index header."""

    cells: int = eoh.DEFAULT_CELLS
    m: int = 16
    k: int = 256
    min_side: int = proposals.DEFAULT_MIN_SIDE
    margin_threshold: float = margins.DEFAULT_MARGIN_THRESHOLD
    binarize_threshold: int = raster.DEFAULT_BINARIZE_THRESHOLD
    erosion_radius: int = 1
    erosion_iterations: int = 2
    border_width: int = 1
    magnitude_floor: float = raster.DEFAULT_MAGNITUDE_FLOOR
    segment_k: float = 300.0
    segment_min_region: int = 50
    blur_sigma: float = 0.8
    aspect_limit: float = 1.5
    overlap: float = 0.5
    max_proposals: int = 1000
    kmeans_iters: int = 25
    holdout_fraction: float = 0.15
    seed: int = 0

    @property
    def dim(self) -> int:
        return eoh.feature_dim(self.cells)

    def margin_config(self) -> margins.MarginConfig:
        return margins.MarginConfig(
            binarize_threshold=self.binarize_threshold,
            erosion_radius=self.erosion_radius,
            erosion_iterations=self.erosion_iterations,
            border_width=self.border_width,
        )

    def proposal_config(self) -> proposals.ProposalConfig:
        return proposals.ProposalConfig(
            segment_k=self.segment_k,
            segment_min_region=self.segment_min_region,
            blur_sigma=self.blur_sigma,
            aspect_limit=self.aspect_limit,
            overlap=self.overlap,
            max_proposals=self.max_proposals,
        )

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, blob: str) -> "IndexConfig":
        data = json.loads(blob)
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class PageRecord:
    """Geometry and codes of one indexed page."""

    page_id: int
    title_id: str
    path: str
    width: int
    height: int
    windows: list[Window]
    codes: np.ndarray  # (N, m) uint8

    def __post_init__(self):
        if len(self.windows) != self.codes.shape[0]:
            raise ValueError("windows and codes must be parallel")

    @property
    def n_windows(self) -> int:
        return len(self.windows)


@dataclass
class Index:
    config: IndexConfig
    quantizer: ProductQuantizer
    pages: list[PageRecord]
    failures: list[tuple[str, str]] = field(default_factory=list)  # build-only

    def __post_init__(self):
        for pos, rec in enumerate(self.pages):
            if rec.page_id != pos:
                raise ValueError(f"page ids must be dense, got {rec.page_id} at {pos}")
        self._scan_cache = None

    @property
    def page_count(self) -> int:
        return len(self.pages)

    def page(self, page_id: int) -> PageRecord:
        if not 0 <= page_id < len(self.pages):
            raise PageNotFoundError(f"no page with id {page_id}")
        return self.pages[page_id]

    def _scan_arrays(self):
        """Concatenated codes plus per-page offsets, built once per index."""
        if self._scan_cache is None:
            counts = np.array([rec.n_windows for rec in self.pages], dtype=np.int64)
            offsets = np.zeros(len(counts) + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            if offsets[-1] == 0:
                codes = np.empty((0, self.config.m), dtype=np.uint8)
            else:
                codes = np.concatenate(
                    [rec.codes for rec in self.pages if rec.n_windows], axis=0
                )
            self._scan_cache = (codes, offsets)
        return self._scan_cache

    def memory_report(self) -> dict:
        code_bytes = sum(rec.codes.nbytes for rec in self.pages)
        cb = self.quantizer.codebooks_
        return {
            "pages": len(self.pages),
            "windows": sum(rec.n_windows for rec in self.pages),
            "code_bytes": code_bytes,
            "codebook_bytes": cb.size * 4,
            "geometry_bytes": sum(rec.n_windows for rec in self.pages) * 16,
        }


def load_page(path) -> np.ndarray:
    """Read an 8-bit PNG/JPEG page as a grayscale plane."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB", "RGBA"):
            im = im.convert("RGB")
        return as_gray_image(np.asarray(im))


def _process_page(path: str, cfg: IndexConfig, page_id: int):
    """Margin mask, proposals, and descriptors for one page."""
    page = load_page(path)
    mask = margins.compute_margin_mask(page, cfg.margin_config())
    proposer = proposals.WindowProposer(
        cfg.proposal_config(), cfg.min_side, cfg.margin_threshold
    )
    windows = proposer.propose(page, mask, page_id)
    integrals = raster.oriented_integrals(page, cfg.magnitude_floor)
    usable = [w for w in windows if w.side >= cfg.cells]
    pf = eoh.describe_windows(integrals, usable, cfg.cells)
    h, w = page.shape
    return w, h, pf


def holdout_page_ids(n_pages: int, fraction: float, seed: int) -> list[int]:
    """Deterministic choice of pages whose features train the codebook."""
    n_hold = min(n_pages, max(1, round(fraction * n_pages)))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x480C]))
    return sorted(int(i) for i in rng.permutation(n_pages)[:n_hold])


def build_index(
    inputs: list[tuple[str, str]],
    cfg: IndexConfig = IndexConfig(),
    workers: int = 1,
) -> Index:
    """Index a corpus of (image path, title id) pairs.

    Pages that fail to decode are skipped and reported on the returned
    index's `failures` list; the build only fails outright when every page
    does. The codebook is trained once, on features from a deterministic
    held-out subset of the successfully processed pages.
    """
    if not inputs:
        raise SketchdexError("no input pages given")

    def job(arg):
        pos, (path, _title) = arg
        try:
            return _process_page(str(path), cfg, pos)
        except (OSError, ValueError) as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, enumerate(inputs)))
    else:
        results = [job(item) for item in enumerate(inputs)]

    processed = []  # (path, title, width, height, PageFeatures)
    failures = []
    for (path, title), res in zip(inputs, results):
        if isinstance(res, Exception):
            failures.append((str(path), f"{type(res).__name__}: {res}"))
        else:
            w, h, pf = res
            processed.append((str(path), title, w, h, pf))
    if not processed:
        raise SketchdexError(
            f"all {len(inputs)} pages failed to decode; first error: {failures[0][1]}"
        )

    if all(rec[4].features.shape[0] == 0 for rec in processed):
        # Nothing to encode anywhere (e.g. blank pages); keep the index
        # valid with a placeholder codebook instead of failing the build.
        quantizer = ProductQuantizer(m=cfg.m, k=cfg.k, iters=cfg.kmeans_iters,
                                     seed=cfg.seed)
        quantizer.codebooks_ = np.zeros(
            (cfg.m, cfg.k, cfg.dim // cfg.m), dtype=np.float32
        )
        quantizer.dim_ = cfg.dim
        quantizer.subdim_ = cfg.dim // cfg.m
        quantizer.training_distortions_ = []
    else:
        hold = holdout_page_ids(len(processed), cfg.holdout_fraction, cfg.seed)
        train = [processed[i][4].features for i in hold if processed[i][4].features.size]
        n_train = sum(f.shape[0] for f in train)
        if n_train < cfg.k:
            raise InsufficientSamplesError(
                f"holdout yielded {n_train} training features but k={cfg.k}; "
                "raise holdout_fraction or lower k"
            )
        quantizer = ProductQuantizer(
            m=cfg.m, k=cfg.k, iters=cfg.kmeans_iters, seed=cfg.seed
        ).fit(np.concatenate(train, axis=0))

    pages = []
    for page_id, (path, title, w, h, pf) in enumerate(processed):
        windows = [
            Window(page_id, win.x, win.y, win.side) for win in pf.windows
        ]
        codes = (
            quantizer.transform(pf.features)
            if pf.features.size
            else np.empty((0, cfg.m), dtype=np.uint8)
        )
        pages.append(
            PageRecord(
                page_id=page_id, title_id=title, path=path,
                width=w, height=h, windows=windows, codes=codes,
            )
        )
    return Index(config=cfg, quantizer=quantizer, pages=pages, failures=failures)


def _require_searchable(idx: Index):
    if not idx.pages:
        raise EmptyIndexError("index holds no pages")
    codes, offsets = idx._scan_arrays()
    if offsets[-1] == 0:
        raise EmptyIndexError("index holds no searchable windows")
    return codes, offsets


def search(idx: Index, y: np.ndarray, k: int = 20) -> list[SearchHit]:
    """Top-k pages, one hit per page (its best window).

    Pages tie-break by ascending page id; the best window of a page is its
    lowest-indexed minimal-distance window.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    codes, offsets = _require_searchable(idx)
    y = check_feature_matrix(y, dim=idx.config.dim)[0]
    table = idx.quantizer.adc_table(y)
    dists = adc_distances(table, codes)

    nonempty = np.flatnonzero(np.diff(offsets) > 0)
    mins = np.minimum.reduceat(dists, offsets[nonempty])
    order = np.lexsort((nonempty, mins))[:k]

    hits = []
    for pos in order:
        pid = int(nonempty[pos])
        lo, hi = offsets[pid], offsets[pid + 1]
        local = int(np.argmin(dists[lo:hi]))
        hits.append(
            SearchHit(
                page_id=pid,
                window=idx.pages[pid].windows[local],
                distance=float(dists[lo + local]),
            )
        )
    return hits


def search_windows(idx: Index, y: np.ndarray, k: int = 100) -> list[SearchHit]:
    """Global top-k windows across all pages (several per page allowed)."""
    codes, offsets = _require_searchable(idx)
    y = check_feature_matrix(y, dim=idx.config.dim)[0]
    table = idx.quantizer.adc_table(y)
    flat_idx, flat_dists = adc_scan(table, codes, k)
    page_of = np.searchsorted(offsets, flat_idx, side="right") - 1
    hits = []
    for fi, pid, dist in zip(flat_idx, page_of, flat_dists):
        local = int(fi - offsets[pid])
        hits.append(
            SearchHit(
                page_id=int(pid),
                window=idx.pages[int(pid)].windows[local],
                distance=float(dist),
            )
        )
    return hits


def snap_to_square(rect: Box, page_w: int, page_h: int) -> Window:
    """Expand a rectangle to its longer side, centered, clamped into the page."""
    side = min(max(rect.w, rect.h), page_w, page_h)
    x = rect.x + (rect.w - side) // 2
    y = rect.y + (rect.h - side) // 2
    x = max(0, min(x, page_w - side))
    y = max(0, min(y, page_h - side))
    return Window(page_id=-1, x=x, y=y, side=side)


def region_feature(idx: Index, page_id: int, rect: Box) -> np.ndarray:
    """Descriptor of an arbitrary page region, extracted from the original
    raster."""
    rec = idx.page(page_id)
    if rect.x < 0 or rect.y < 0 or rect.x2 > rec.width or rect.y2 > rec.height:
        raise OutOfBoundsError(
            f"rect ({rect.x},{rect.y},{rect.w}x{rect.h}) exceeds page "
            f"{rec.width}x{rec.height}"
        )
    page = load_page(rec.path)
    square = snap_to_square(rect, rec.width, rec.height)
    if square.side < idx.config.cells:
        raise BlankRegionError("selected region is smaller than the descriptor grid")
    integrals = raster.oriented_integrals(page, idx.config.magnitude_floor)
    feat = eoh.extract_eoh(integrals, square, idx.config.cells)
    if feat is None:
        raise BlankRegionError("selected region contains no edges")
    return feat


def region_query(
    idx: Index, page_id: int, rect: Box, k: int = 20, windows: bool = False
) -> list[SearchHit]:
    """Relevance feedback: re-query with any region of an indexed page."""
    feat = region_feature(idx, page_id, rect)
    return search_windows(idx, feat, k) if windows else search(idx, feat, k)


# -- persistence ---------------------------------------------------------


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _U32.pack(len(raw)) + raw


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptIndexError(f"truncated while reading {what}", offset=self.pos)
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(4, what))[0]

    def string(self, what: str) -> str:
        n = self.u32(what + " length")
        try:
            return self.take(n, what).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndexError(f"bad utf-8 in {what}", offset=self.pos) from exc


def index_to_bytes(idx: Index) -> bytes:
    parts = [INDEX_MAGIC, _U32.pack(INDEX_VERSION)]
    cfg = idx.config.to_json().encode("utf-8")
    parts.append(_U32.pack(len(cfg)))
    parts.append(cfg)
    parts.append(idx.quantizer.to_bytes())
    parts.append(_U32.pack(len(idx.pages)))
    for rec in idx.pages:
        parts.append(_U32.pack(rec.page_id))
        parts.append(_pack_str(rec.title_id))
        parts.append(_pack_str(rec.path))
        parts.append(struct.pack("<III", rec.width, rec.height, rec.n_windows))
        geom = np.zeros((rec.n_windows, 4), dtype="<u4")
        for i, w in enumerate(rec.windows):
            geom[i, :3] = (w.x, w.y, w.side)
        parts.append(geom.tobytes())
        parts.append(np.ascontiguousarray(rec.codes, dtype=np.uint8).tobytes())
    return b"".join(parts)


def index_from_bytes(buf: bytes) -> Index:
    r = _Reader(buf)
    if r.take(4, "magic") != INDEX_MAGIC:
        raise CorruptIndexError("not a SKDX index file", offset=0)
    version = r.u32("version")
    if version != INDEX_VERSION:
        raise CorruptIndexError(f"unsupported index version {version}", offset=4)
    cfg = IndexConfig.from_json(r.string("config"))
    quantizer, r.pos = ProductQuantizer.from_bytes(buf, r.pos)
    if quantizer.dim_ != cfg.dim:
        raise CorruptIndexError(
            f"codebook dim {quantizer.dim_} does not match 4*cells^2 = {cfg.dim}"
        )
    if quantizer.m != cfg.m or quantizer.k != cfg.k:
        raise CorruptIndexError("codebook geometry does not match the config")

    pages = []
    page_count = r.u32("page count")
    for pos in range(page_count):
        page_id = r.u32("page id")
        if page_id != pos:
            raise CorruptIndexError(f"page ids not dense (got {page_id} at {pos})",
                                    offset=r.pos)
        title = r.string("title id")
        path = r.string("page path")
        width = r.u32("page width")
        height = r.u32("page height")
        n = r.u32("window count")
        geom = np.frombuffer(r.take(n * 16, "window geometry"), dtype="<u4")
        geom = geom.reshape(n, 4)
        windows = []
        for x, y, side, _ in geom:
            win = Window(page_id, int(x), int(y), int(side))
            if win.x + win.side > width or win.y + win.side > height:
                raise CorruptIndexError(
                    f"window {win} exceeds page {width}x{height}", offset=r.pos
                )
            windows.append(win)
        codes = np.frombuffer(r.take(n * cfg.m, "codes"), dtype=np.uint8)
        codes = codes.reshape(n, cfg.m).copy()
        pages.append(
            PageRecord(page_id=page_id, title_id=title, path=path, width=width,
                       height=height, windows=windows, codes=codes)
        )
    if r.pos != len(buf):
        raise CorruptIndexError("trailing bytes after last page record", offset=r.pos)
    return Index(config=cfg, quantizer=quantizer, pages=pages)


def save_index(idx: Index, path) -> None:
    Path(path).write_bytes(index_to_bytes(idx))


def load_index(path) -> Index:
    return index_from_bytes(Path(path).read_bytes())


def collect_pages(input_dir) -> list[tuple[str, str]]:
    """Enumerate a corpus directory: sorted image files, title = subdirectory.

    Pages directly under the root take the root's name as their title.
    """
    root = Path(input_dir)
    exts = {".png", ".jpg", ".jpeg"}
    paths = sorted(p for p in root.rglob("*") if p.suffix.lower() in exts and p.is_file())
    out = []
    for p in paths:
        rel = p.relative_to(root)
        title = rel.parts[0] if len(rel.parts) > 1 else root.name
        out.append((str(p.resolve()), title))
    return out


class SketchRetriever(BaseEstimator):
    """Estimator-style face over the engine: fit a corpus, query sketches.

    Thin composition wrapper so the pipeline drops into sklearn-style
    tooling; all heavy lifting lives in the module functions above.
    """

    def __init__(self, cells: int = 8, m: int = 16, k: int = 256,
                 min_side: int = 100, margin_threshold: float = 0.1,
                 holdout_fraction: float = 0.15, seed: int = 0):
        self.cells = cells
        self.m = m
        self.k = k
        self.min_side = min_side
        self.margin_threshold = margin_threshold
        self.holdout_fraction = holdout_fraction
        self.seed = seed

    def _config(self) -> IndexConfig:
        return IndexConfig(
            cells=self.cells, m=self.m, k=self.k, min_side=self.min_side,
            margin_threshold=self.margin_threshold,
            holdout_fraction=self.holdout_fraction, seed=self.seed,
        )

    def fit(self, X, y=None) -> "SketchRetriever":
        """X: corpus directory path, or a list of (image path, title) pairs."""
        inputs = collect_pages(X) if isinstance(X, (str, Path)) else list(X)
        self.index_ = build_index(inputs, self._config())
        return self

    def kneighbors(self, sketch: np.ndarray, n_neighbors: int = 20) -> list[SearchHit]:
        feat = eoh.sketch_to_feature(sketch, self.cells)
        if feat is None:
            raise BlankRegionError("sketch canvas is blank")
        return search(self.index_, feat, n_neighbors)
