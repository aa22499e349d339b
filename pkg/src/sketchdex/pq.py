"""Product quantization: subspace codebooks, byte codes, and ADC scans.

A D-dimensional feature splits into M slices of D/M values; each slice is
quantized against its own K-centroid codebook, so a feature stores as M
bytes. A query stays uncompressed: its squared distance to every centroid of
every subspace is tabulated once, after which the distance to any stored
code is M table lookups. That lookup sum equals the exact squared Euclidean
distance between the query and the code's reconstruction, which is what
makes brute-force decode-and-rank a usable oracle in the tests.
"""

from __future__ import annotations

import struct

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    CorruptIndexError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    InsufficientSamplesError,
)
from .validation import check_feature_matrix

CODEBOOK_MAGIC = b"PQCB"
CODEBOOK_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQ")  # magic, version, M, K, D, seed

_ENCODE_CHUNK = 8192


def _kmeans(x: np.ndarray, k: int, iters: int, tol: float, rng: np.random.Generator):
    """Lloyd k-means with k-means++ seeding.

    Returns (centroids, per-iteration mean squared distortion). Empty
    clusters are re-seeded with the point currently farthest from its
    assigned centroid.
    """
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centroids[j] = x[idx]
        np.minimum(closest, ((x - centroids[j]) ** 2).sum(axis=1), out=closest)

    distortions: list[float] = []
    for _ in range(iters):
        d2 = cdist(x, centroids, "sqeuclidean")
        assign = d2.argmin(axis=1)
        mind = d2[np.arange(n), assign]
        cur = float(mind.mean())
        if distortions and distortions[-1] > 0:
            if (distortions[-1] - cur) / distortions[-1] < tol:
                distortions.append(cur)
                break
        distortions.append(cur)

        counts = np.bincount(assign, minlength=k)
        sums = np.empty_like(centroids)
        for dim in range(x.shape[1]):
            sums[:, dim] = np.bincount(assign, weights=x[:, dim], minlength=k)
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        for j in np.flatnonzero(~nonempty):
            far = int(mind.argmax())
            centroids[j] = x[far]
            mind[far] = 0.0
    return centroids, distortions


class ProductQuantizer(BaseEstimator, TransformerMixin):
    """Vector quantizer with per-subspace codebooks.

    Parameters
    ----------
    m : number of subspaces (code length in bytes)
    k : centroids per subspace; 256 keeps a code index in one byte
    iters : Lloyd iteration cap per subspace
    tol : relative distortion improvement below which training stops early
    seed : rng seed; a fixed seed reproduces the codebook bit for bit
    """

    def __init__(self, m: int = 16, k: int = 256, iters: int = 25, tol: float = 1e-4,
                 seed: int = 0):
        self.m = m
        self.k = k
        self.iters = iters
        self.tol = tol
        self.seed = seed

    def fit(self, X: np.ndarray, y=None) -> "ProductQuantizer":
        X = check_feature_matrix(X)
        n, dim = X.shape
        if self.k > 256:
            raise ValueError("k > 256 does not fit a one-byte code index")
        if dim % self.m != 0:
            raise DimensionMismatchError(f"dim {dim} is not divisible by m={self.m}")
        if n < self.k:
            raise InsufficientSamplesError(
                f"need at least k={self.k} training vectors, got {n}"
            )
        sub = dim // self.m
        x64 = X.astype(np.float64)
        codebooks = np.empty((self.m, self.k, sub), dtype=np.float32)
        self.training_distortions_: list[list[float]] = []
        for mi in range(self.m):
            rng = np.random.default_rng(np.random.SeedSequence([int(self.seed), mi]))
            cents, dists = _kmeans(
                x64[:, mi * sub : (mi + 1) * sub], self.k, self.iters, self.tol, rng
            )
            codebooks[mi] = cents.astype(np.float32)
            self.training_distortions_.append(dists)
        self.codebooks_ = codebooks
        self.dim_ = dim
        self.subdim_ = sub
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Encode vectors to (N, m) uint8 codes: per-subspace nearest centroid,
        ties resolved to the lowest centroid index."""
        check_is_fitted(self, "codebooks_")
        X = check_feature_matrix(X, dim=self.dim_)
        codes = np.empty((X.shape[0], self.m), dtype=np.uint8)
        for start in range(0, X.shape[0], _ENCODE_CHUNK):
            chunk = X[start : start + _ENCODE_CHUNK].astype(np.float64)
            for mi in range(self.m):
                d2 = cdist(
                    chunk[:, mi * self.subdim_ : (mi + 1) * self.subdim_],
                    self.codebooks_[mi].astype(np.float64),
                    "sqeuclidean",
                )
                codes[start : start + chunk.shape[0], mi] = d2.argmin(axis=1)
        return codes

    def inverse_transform(self, codes: np.ndarray) -> np.ndarray:
        """Reconstruct (N, D) float32 vectors by concatenating the indexed
        subcentroids."""
        check_is_fitted(self, "codebooks_")
        codes = np.asarray(codes)
        if codes.ndim == 1:
            codes = codes[np.newaxis, :]
        if codes.shape[1] != self.m:
            raise DimensionMismatchError(f"expected {self.m}-byte codes, got {codes.shape[1]}")
        if codes.size and int(codes.max()) >= self.k:
            raise IndexOutOfRangeError(f"code index {int(codes.max())} >= k={self.k}")
        out = np.empty((codes.shape[0], self.dim_), dtype=np.float32)
        for mi in range(self.m):
            out[:, mi * self.subdim_ : (mi + 1) * self.subdim_] = self.codebooks_[mi][
                codes[:, mi]
            ]
        return out

    def adc_table(self, y: np.ndarray) -> np.ndarray:
        """(m, k) table of squared distances from the query's slices to every
        subcentroid."""
        check_is_fitted(self, "codebooks_")
        y = check_feature_matrix(y, dim=self.dim_)[0].astype(np.float64)
        table = np.empty((self.m, self.k), dtype=np.float64)
        for mi in range(self.m):
            diff = self.codebooks_[mi].astype(np.float64) - y[
                mi * self.subdim_ : (mi + 1) * self.subdim_
            ]
            table[mi] = (diff * diff).sum(axis=1)
        return table

    # -- serialization --------------------------------------------------

    def to_bytes(self) -> bytes:
        check_is_fitted(self, "codebooks_")
        header = _HEADER.pack(
            CODEBOOK_MAGIC, CODEBOOK_VERSION, self.m, self.k, self.dim_,
            int(self.seed) & 0xFFFFFFFFFFFFFFFF,
        )
        return header + self.codebooks_.astype("<f4").tobytes(order="C")

    @classmethod
    def from_bytes(cls, buf: bytes, offset: int = 0) -> tuple["ProductQuantizer", int]:
        """Parse a serialized codebook; returns (quantizer, offset past it)."""
        if len(buf) < offset + _HEADER.size:
            raise CorruptIndexError("truncated codebook header", offset=len(buf))
        magic, version, m, k, dim, seed = _HEADER.unpack_from(buf, offset)
        if magic != CODEBOOK_MAGIC:
            raise CorruptIndexError(f"bad codebook magic {magic!r}", offset=offset)
        if version != CODEBOOK_VERSION:
            raise CorruptIndexError(f"unsupported codebook version {version}", offset=offset)
        if m < 1 or k < 1 or k > 256 or dim < 1 or dim % m != 0:
            raise CorruptIndexError(f"inconsistent codebook header m={m} k={k} d={dim}",
                                    offset=offset)
        body = offset + _HEADER.size
        nbytes = m * k * (dim // m) * 4
        if len(buf) < body + nbytes:
            raise CorruptIndexError("truncated codebook centroids", offset=len(buf))
        cents = np.frombuffer(buf, dtype="<f4", count=m * k * (dim // m), offset=body)
        if not np.all(np.isfinite(cents)):
            raise CorruptIndexError("codebook contains non-finite centroids", offset=body)
        pq = cls(m=m, k=k, seed=seed)
        pq.codebooks_ = cents.reshape(m, k, dim // m).copy()
        pq.dim_ = dim
        pq.subdim_ = dim // m
        pq.training_distortions_ = []
        return pq, body + nbytes

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ProductQuantizer":
        with open(path, "rb") as fh:
            pq, _ = cls.from_bytes(fh.read())
        return pq


def adc_distances(table: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Squared query-to-code distance for every code: M table lookups each."""
    codes = np.asarray(codes)
    if codes.ndim != 2 or codes.shape[1] != table.shape[0]:
        raise DimensionMismatchError(
            f"codes of width {codes.shape[-1] if codes.ndim else 0} do not match "
            f"an m={table.shape[0]} table"
        )
    dists = table[0][codes[:, 0]].copy()
    for mi in range(1, table.shape[0]):
        dists += table[mi][codes[:, mi]]
    return dists


def adc_scan(table: np.ndarray, codes: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k codes by ascending ADC distance.

    Single pass over the code array; equal distances rank by lower sequence
    index. Returns (indices, distances), both length min(k, len(codes)).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dists = adc_distances(table, codes)
    n = dists.shape[0]
    k_eff = min(k, n)
    if k_eff == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    if k_eff == n:
        cand = np.arange(n)
    else:
        kth = np.partition(dists, k_eff - 1)[k_eff - 1]
        below = np.flatnonzero(dists < kth)
        at = np.flatnonzero(dists == kth)[: k_eff - below.size]
        cand = np.concatenate([below, at])
    order = cand[np.lexsort((cand, dists[cand]))]
    return order, dists[order]
