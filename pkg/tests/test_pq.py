import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchdex.exceptions import (
    CorruptIndexError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    InsufficientSamplesError,
)
from sketchdex.pq import ProductQuantizer, adc_distances, adc_scan


def random_quantizer(m=4, k=16, dim=32, seed=0) -> ProductQuantizer:
    """A quantizer with random centroids; no training involved."""
    rng = np.random.default_rng(seed)
    pq = ProductQuantizer(m=m, k=k, seed=seed)
    pq.codebooks_ = rng.standard_normal((m, k, dim // m)).astype(np.float32)
    pq.dim_ = dim
    pq.subdim_ = dim // m
    pq.training_distortions_ = []
    return pq


def encode_oracle(pq: ProductQuantizer, x: np.ndarray) -> np.ndarray:
    """Exhaustive per-subspace argmin, written as plain loops."""
    code = np.empty(pq.m, dtype=np.uint8)
    for m in range(pq.m):
        sl = x[m * pq.subdim_ : (m + 1) * pq.subdim_].astype(np.float64)
        best, best_d = 0, np.inf
        for j in range(pq.k):
            d = float(((sl - pq.codebooks_[m][j].astype(np.float64)) ** 2).sum())
            if d < best_d:
                best, best_d = j, d
        code[m] = best
    return code


def decode_oracle(pq: ProductQuantizer, code: np.ndarray) -> np.ndarray:
    parts = [pq.codebooks_[m][int(code[m])] for m in range(pq.m)]
    return np.concatenate(parts).astype(np.float64)


class TestTraining:
    def test_exact_clustering_of_repeated_points(self, rng):
        k = 8
        points = rng.standard_normal((k, 12)).astype(np.float32)
        samples = np.tile(points, (5, 1))
        pq = ProductQuantizer(m=3, k=k, seed=1).fit(samples)
        for m in range(3):
            assert pq.training_distortions_[m][-1] == pytest.approx(0.0, abs=1e-12)
            learned = {tuple(np.round(c, 5)) for c in pq.codebooks_[m]}
            wanted = {tuple(np.round(p[m * 4 : (m + 1) * 4], 5)) for p in points}
            assert learned == wanted

    def test_fixed_seed_reproduces_codebook_bit_for_bit(self, rng):
        samples = rng.standard_normal((300, 16)).astype(np.float32)
        a = ProductQuantizer(m=4, k=10, seed=42).fit(samples)
        b = ProductQuantizer(m=4, k=10, seed=42).fit(samples)
        assert np.array_equal(a.codebooks_, b.codebooks_)

    def test_different_seed_changes_codebook(self, rng):
        samples = rng.standard_normal((300, 16)).astype(np.float32)
        a = ProductQuantizer(m=4, k=10, seed=1).fit(samples)
        b = ProductQuantizer(m=4, k=10, seed=2).fit(samples)
        assert not np.array_equal(a.codebooks_, b.codebooks_)

    def test_distortion_non_increasing_per_iteration(self, rng):
        samples = rng.standard_normal((500, 24)).astype(np.float32)
        pq = ProductQuantizer(m=4, k=20, iters=25, seed=5).fit(samples)
        for dists in pq.training_distortions_:
            assert len(dists) >= 1
            for prev, cur in zip(dists, dists[1:]):
                assert cur <= prev * (1 + 1e-12)

    def test_insufficient_samples(self, rng):
        with pytest.raises(InsufficientSamplesError):
            ProductQuantizer(m=2, k=64).fit(rng.standard_normal((10, 8)))

    def test_dim_not_divisible(self, rng):
        with pytest.raises(DimensionMismatchError):
            ProductQuantizer(m=3, k=4).fit(rng.standard_normal((20, 8)))


class TestEncodeDecode:
    def test_concatenated_centroids_encode_exactly(self):
        pq = random_quantizer(m=4, k=16, dim=32)
        picks = [3, 7, 0, 15]
        x = np.concatenate([pq.codebooks_[m][j] for m, j in enumerate(picks)])
        assert pq.transform(x)[0].tolist() == picks

    def test_decode_encode_roundtrip_on_codebook_product(self):
        pq = random_quantizer()
        code = np.array([[1, 2, 3, 4]], dtype=np.uint8)
        x = pq.inverse_transform(code)
        assert np.array_equal(pq.transform(x), code)
        np.testing.assert_array_equal(pq.inverse_transform(pq.transform(x)), x)

    def test_codes_match_exhaustive_oracle(self, rng):
        pq = random_quantizer(seed=3)
        xs = rng.standard_normal((40, 32)).astype(np.float32)
        codes = pq.transform(xs)
        for x, code in zip(xs, codes):
            assert np.array_equal(code, encode_oracle(pq, x))

    def test_codes_are_single_bytes(self, rng):
        pq = random_quantizer()
        codes = pq.transform(rng.standard_normal((10, 32)).astype(np.float32))
        assert codes.dtype == np.uint8
        assert codes.shape == (10, 4)

    def test_decode_concatenation_order(self):
        pq = random_quantizer()
        code = np.array([5, 6, 7, 8], dtype=np.uint8)
        out = pq.inverse_transform(code)[0]
        np.testing.assert_array_equal(out, decode_oracle(pq, code).astype(np.float32))

    def test_decode_rejects_out_of_range_index(self):
        pq = random_quantizer(k=16)
        with pytest.raises(IndexOutOfRangeError):
            pq.inverse_transform(np.array([[1, 2, 3, 200]], dtype=np.uint8))

    def test_encode_rejects_wrong_dim(self, rng):
        pq = random_quantizer()
        with pytest.raises(DimensionMismatchError):
            pq.transform(rng.standard_normal((3, 31)))


class TestAdcTable:
    def test_zero_at_matching_centroid(self):
        pq = random_quantizer()
        y = np.concatenate([pq.codebooks_[m][m + 1] for m in range(4)])
        table = pq.adc_table(y)
        for m in range(4):
            assert table[m][m + 1] == pytest.approx(0.0, abs=1e-10)

    def test_matches_direct_distances(self, rng):
        pq = random_quantizer(seed=9)
        y = rng.standard_normal(32)
        table = pq.adc_table(y)
        for m in range(4):
            for j in range(16):
                direct = float(
                    ((y[m * 8 : (m + 1) * 8] - pq.codebooks_[m][j]) ** 2).sum()
                )
                assert table[m][j] == pytest.approx(direct, rel=1e-6)

    def test_entries_finite_nonnegative(self, rng):
        pq = random_quantizer()
        table = pq.adc_table(rng.standard_normal(32))
        assert np.isfinite(table).all()
        assert (table >= 0).all()


class TestAdcScan:
    def test_own_code_ranks_first_with_zero_distance(self, rng):
        pq = random_quantizer()
        y = pq.inverse_transform(np.array([[2, 9, 4, 1]], dtype=np.uint8))[0]
        codes = pq.transform(rng.standard_normal((50, 32)).astype(np.float32))
        codes[17] = [2, 9, 4, 1]
        idx, dist = adc_scan(pq.adc_table(y), codes, 3)
        assert idx[0] == 17
        assert dist[0] == pytest.approx(0.0, abs=1e-9)

    def test_ranking_equals_decode_and_rank_oracle(self, rng):
        pq = random_quantizer(seed=11)
        codes = rng.integers(0, 16, size=(2000, 4)).astype(np.uint8)
        y = rng.standard_normal(32)
        table = pq.adc_table(y)
        idx, dists = adc_scan(table, codes, 2000)

        oracle_d = np.array(
            [((y - decode_oracle(pq, c)) ** 2).sum() for c in codes]
        )
        oracle_order = np.lexsort((np.arange(2000), oracle_d))
        assert np.array_equal(idx, oracle_order)
        np.testing.assert_allclose(dists, oracle_d[oracle_order], rtol=1e-5)

    def test_k_larger_than_codes_returns_all(self, rng):
        pq = random_quantizer()
        codes = rng.integers(0, 16, size=(7, 4)).astype(np.uint8)
        idx, dists = adc_scan(pq.adc_table(rng.standard_normal(32)), codes, 99)
        assert len(idx) == 7
        assert sorted(idx.tolist()) == list(range(7))
        assert (np.diff(dists) >= 0).all()

    def test_duplicate_codes_tie_break_to_lower_index(self, rng):
        pq = random_quantizer()
        codes = rng.integers(0, 16, size=(30, 4)).astype(np.uint8)
        codes[20] = codes[5]
        codes[25] = codes[5]
        idx, dists = adc_scan(pq.adc_table(rng.standard_normal(32)), codes, 30)
        positions = [int(np.where(idx == i)[0][0]) for i in (5, 20, 25)]
        assert positions == sorted(positions)

    def test_top_k_boundary_ties_prefer_lower_index(self):
        table = np.zeros((1, 4))
        table[0] = [0.0, 1.0, 1.0, 2.0]
        codes = np.array([[1], [2], [0], [1], [3]], dtype=np.uint8)
        idx, dists = adc_scan(table, codes, 2)
        # distances: [1, 1, 0, 1, 2]; top-2 = index 2 (0.0) then index 0 (1.0).
        assert idx.tolist() == [2, 0]

    def test_rejects_mismatched_code_width(self, rng):
        pq = random_quantizer()
        with pytest.raises(DimensionMismatchError):
            adc_scan(pq.adc_table(rng.standard_normal(32)),
                     np.zeros((5, 3), dtype=np.uint8), 2)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_adc_identity_matches_reconstruction_distance(seed):
    rng = np.random.default_rng(seed)
    pq = random_quantizer(m=4, k=8, dim=16, seed=int(seed % 1000))
    y = rng.standard_normal(16)
    codes = rng.integers(0, 8, size=(64, 4)).astype(np.uint8)
    recon = pq.inverse_transform(codes).astype(np.float64)
    exact = ((y - recon) ** 2).sum(axis=1)
    approx = adc_distances(pq.adc_table(y), codes)
    np.testing.assert_allclose(approx, exact, rtol=1e-5, atol=1e-12)


class TestSerialization:
    def test_roundtrip(self, tmp_path, rng):
        pq = ProductQuantizer(m=4, k=10, seed=99).fit(
            rng.standard_normal((200, 32)).astype(np.float32)
        )
        path = tmp_path / "cb.pqcb"
        pq.save(path)
        loaded = ProductQuantizer.load(path)
        assert (loaded.m, loaded.k, loaded.dim_, loaded.seed) == (4, 10, 32, 99)
        np.testing.assert_array_equal(loaded.codebooks_, pq.codebooks_)

    def test_code_array_is_exactly_m_bytes_per_vector(self, rng):
        pq = random_quantizer(m=4, k=16, dim=32)
        codes = pq.transform(rng.standard_normal((25, 32)).astype(np.float32))
        assert codes.tobytes() == codes.astype(np.uint8).tobytes()
        assert len(codes.tobytes()) == 25 * 4

    def test_truncated_blob(self):
        pq = random_quantizer()
        blob = pq.to_bytes()
        with pytest.raises(CorruptIndexError):
            ProductQuantizer.from_bytes(blob[: len(blob) - 10])

    def test_bad_magic(self):
        pq = random_quantizer()
        blob = b"XXXX" + pq.to_bytes()[4:]
        with pytest.raises(CorruptIndexError):
            ProductQuantizer.from_bytes(blob)
