import numpy as np
import pytest

from helpers import two_frame_page
from sketchdex import margins
from sketchdex.exceptions import OutOfBoundsError
from sketchdex.geometry import Window


def brute_ratio(mask: np.ndarray, w: Window) -> float:
    return mask[w.y : w.y + w.side, w.x : w.x + w.side].sum() / (w.side * w.side)


class TestComputeMarginMask:
    def test_all_white_page_fully_masked(self):
        page = np.full((40, 50), 255, dtype=np.uint8)
        mm = margins.compute_margin_mask(page)
        assert not mm.degenerate
        assert mm.mask.all()

    def test_all_black_page_is_degenerate(self):
        page = np.zeros((40, 50), dtype=np.uint8)
        mm = margins.compute_margin_mask(page)
        assert mm.degenerate
        assert not mm.mask.any()

    def test_black_border_band_is_degenerate(self):
        # White survives in the middle but never reaches the page edge.
        page = np.zeros((60, 60), dtype=np.uint8)
        page[20:40, 20:40] = 255
        mm = margins.compute_margin_mask(page)
        assert mm.degenerate
        assert not mm.mask.any()

    def test_two_frame_page_masks_gutter_not_interiors(self):
        page, frames = two_frame_page()
        mm = margins.compute_margin_mask(page)
        assert not mm.degenerate
        # Outer area and the central gutter are margin.
        assert mm.mask[2, 2]
        assert mm.mask[150, 200]  # between the frames
        # Frame interiors are white but enclosed, hence not margin.
        for fx, fy, fw, fh in frames:
            assert not mm.mask[fy + fh // 2, fx + fw // 2]
        # Black border pixels are never margin.
        fx, fy, fw, fh = frames[0]
        assert not mm.mask[fy + 1, fx + fw // 2]


class TestMarginRatio:
    def make_mask(self, plane: np.ndarray) -> margins.MarginMask:
        return margins.MarginMask(mask=plane.astype(bool))

    def test_fully_masked_window_is_one(self):
        mm = self.make_mask(np.ones((30, 30)))
        assert margins.margin_ratio(mm, Window(0, 5, 5, 10)) == 1.0

    def test_unmasked_window_is_zero(self):
        mm = self.make_mask(np.zeros((30, 30)))
        assert margins.margin_ratio(mm, Window(0, 5, 5, 10)) == 0.0

    def test_sixty_percent_window(self):
        # 10x10 window with exactly 60 masked pixels -> 0.6, over the 0.1 cut.
        plane = np.zeros((20, 20), dtype=bool)
        plane[0:6, 0:10] = True
        mm = self.make_mask(plane)
        ratio = margins.margin_ratio(mm, Window(0, 0, 0, 10))
        assert ratio == pytest.approx(0.6)
        assert ratio >= margins.DEFAULT_MARGIN_THRESHOLD

    def test_matches_brute_force_on_random_windows(self, rng):
        page, _ = two_frame_page()
        mm = margins.compute_margin_mask(page)
        for _ in range(1000):
            side = int(rng.integers(1, 80))
            x = int(rng.integers(0, mm.width - side + 1))
            y = int(rng.integers(0, mm.height - side + 1))
            w = Window(0, x, y, side)
            assert margins.margin_ratio(mm, w) == brute_ratio(mm.mask, w)

    def test_growing_window_inside_masked_region_stays_one(self):
        mm = self.make_mask(np.ones((64, 64)))
        for side in (4, 8, 16, 32, 64):
            assert margins.margin_ratio(mm, Window(0, 0, 0, side)) == 1.0

    def test_out_of_bounds_window(self):
        mm = self.make_mask(np.ones((20, 20)))
        with pytest.raises(OutOfBoundsError):
            margins.margin_ratio(mm, Window(0, 15, 15, 10))


class TestMarginOracle:
    def test_synthetic_pages_match_constructed_oracle(self, margin_pages):
        # Disagreement concentrates in the thin erosion band along frame
        # borders; accuracy must stay at or above 99% per page.
        for page, oracle, _frames in margin_pages:
            mm = margins.compute_margin_mask(page)
            assert not mm.degenerate
            accuracy = (mm.mask == oracle).mean()
            assert accuracy >= 0.99
            # Computed margin never claims pixels inside a frame.
            assert not (mm.mask & ~oracle).any()


def test_mask_rgba_overlay_shape():
    page, _ = two_frame_page()
    mm = margins.compute_margin_mask(page)
    rgba = margins.mask_to_rgba(page, mm)
    assert rgba.shape == (*page.shape, 4)
    assert rgba.dtype == np.uint8
