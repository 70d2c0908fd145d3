"""Tests for deterministic rasterization and overlays.

Pixel oracles are chosen where the geometry is forced: the attracting
basin of kappa = -2 never escapes (interior stays background), a rect
entirely right of the escape threshold escapes at count zero, and the
left-of--1 strip of the parameter plane is solid period-1 color.
"""

import math

import numpy as np
import pytest

from exporay.address import ExternalAddress as A
from exporay.geometry import Rect
from exporay.parameter import scan_components
from exporay.render import (
    COLOR_BACKGROUND,
    COLOR_ESCAPING,
    COLOR_UNDECIDED,
    OVERLAY_COLORS,
    draw_segment,
    escape_counts,
    grid_image,
    period_color,
    pixel_of,
    render_dynamical,
    render_parameter,
    save_png,
    shade_counts,
)


class TestEscapeCounts:
    def test_shape_and_orientation(self):
        rect = Rect(-1.0, 1.0, -2.0, 2.0)
        counts = escape_counts(-2.0, rect, (8, 16), max_iter=40)
        assert counts.shape == (16, 8)

    def test_attracting_interior_never_escapes(self):
        # near the attracting fixed point of e^z - 2 the orbit stays put
        counts = escape_counts(-2.0, Rect(-2.2, -1.6, -0.2, 0.2), 6,
                               max_iter=60)
        assert (counts == 60).all()

    def test_past_threshold_escapes_immediately(self):
        counts = escape_counts(-2.0, Rect(60.0, 70.0, 0.0, 1.0), 4,
                               max_iter=10)
        assert (counts == 0).all()

    def test_counts_drop_toward_the_right(self):
        rect = Rect(0.0, 40.0, -0.5, 0.5)
        counts = escape_counts(-2.0, rect, (40, 1), max_iter=60)
        row = counts[0]
        assert row[-1] <= row[0]
        assert row[-1] < 60

    def test_validation(self):
        with pytest.raises(ValueError):
            escape_counts(-2.0, Rect(-1.0, 1.0, -1.0, 1.0), (0, 4))


class TestShading:
    def test_interior_is_background(self):
        counts = np.full((3, 3), 25, dtype=np.int32)
        rgb = shade_counts(counts, 25)
        assert (rgb == np.array(COLOR_BACKGROUND, dtype=np.uint8)).all()

    def test_deterministic_table(self):
        counts = np.arange(12, dtype=np.int32).reshape(3, 4)
        assert (shade_counts(counts, 12) == shade_counts(counts, 12)).all()

    def test_period_colors_distinct(self):
        cols = {period_color(p) for p in range(1, 9)}
        assert len(cols) == 8
        assert COLOR_ESCAPING not in cols
        assert COLOR_UNDECIDED not in cols


class TestPixelMapping:
    def test_corners(self):
        rect = Rect(-1.0, 1.0, -2.0, 2.0)
        assert pixel_of(complex(-1.0, 2.0), rect, 10, 20) == (0, 0)
        assert pixel_of(complex(0.999, -1.999), rect, 10, 20) == (9, 19)

    def test_out_of_rect_is_out_of_range(self):
        rect = Rect(-1.0, 1.0, -1.0, 1.0)
        ix, iy = pixel_of(complex(5.0, 0.0), rect, 10, 10)
        assert ix >= 10


class TestDrawSegment:
    def test_horizontal(self):
        rgb = np.zeros((5, 7, 3), dtype=np.uint8)
        draw_segment(rgb, (1, 2), (5, 2), (255, 0, 0))
        assert (rgb[2, 1:6, 0] == 255).all()
        assert rgb[2, 0, 0] == 0 and rgb[2, 6, 0] == 0

    def test_diagonal_connected(self):
        rgb = np.zeros((6, 6, 3), dtype=np.uint8)
        draw_segment(rgb, (0, 0), (5, 5), (0, 255, 0))
        assert all(rgb[i, i, 1] == 255 for i in range(6))

    def test_clipping_no_wraparound(self):
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        draw_segment(rgb, (-3, 1), (2, 1), (9, 9, 9))
        assert (rgb[1, 0:3] == 9).all()
        # a fully outside segment paints nothing
        rgb2 = np.zeros((4, 4, 3), dtype=np.uint8)
        draw_segment(rgb2, (-5, -5), (-1, -1), (9, 9, 9))
        assert rgb2.sum() == 0


class TestGridImage:
    def test_colors_and_flip(self):
        grid = scan_components((-5.0, -2.0, -0.5, 0.5), (3, 2), max_iter=400)
        rgb = grid_image(grid)
        assert rgb.shape == (2, 3, 3)
        assert (rgb == np.array(period_color(1), dtype=np.uint8)).all()

    def test_reserved_colors_far_right(self):
        grid = scan_components((50.0, 60.0, 0.0, 1.0), (10, 5), max_iter=300)
        rgb = grid_image(grid)
        seen = {tuple(px) for px in rgb.reshape(-1, 3)}
        assert seen <= {COLOR_ESCAPING, COLOR_UNDECIDED}
        assert COLOR_ESCAPING in seen


class TestRenderDynamical:
    def test_overlay_vertical_order_at_right_edge(self):
        rect = Rect(-2.0, 3.0, -4.0, 8.0)
        rgb, meta = render_dynamical(
            -2.0, rect, (200, 240), overlays=[A.parse("|0"), A.parse("|1")]
        )
        c0, c1 = meta["overlays"][0]["color"], meta["overlays"][1]["color"]
        col = 195
        rows0 = [y for y in range(240) if list(rgb[y, col]) == c0]
        rows1 = [y for y in range(240) if list(rgb[y, col]) == c1]
        assert rows0 and rows1
        # the zero ray sits below (larger row index = smaller Im)
        assert min(rows0) > max(rows1)

    def test_no_overlays_plain_shading(self):
        rgb, meta = render_dynamical(-2.0, Rect(-1.0, 1.0, -1.0, 1.0), 16)
        assert rgb.shape == (16, 16, 3)
        assert meta["overlays"] == []

    def test_broken_overlay_truncates_and_annotates(self):
        # kappa = 2.5 lies on the zero-address ray, so the (1|0) pullback
        # runs through the singular value at one potential and breaks
        # there; T_BROKEN is that potential (bisection on g_0(u) = 2.5,
        # stepped back once) and the sample grid ends exactly on it
        t_broken = 1.3224343163450032
        rect = Rect(-2.0, 6.0, -1.0, 7.0)
        rgb, meta = render_dynamical(
            2.5, rect, 60, overlays=[A.parse("1|0")], t_lo=t_broken,
            t_hi=3.0, samples=60,
        )
        o = meta["overlays"][0]
        assert o["broken"] is not None
        assert o["broken"]["error"] == "RayBroken"
        assert 0 < o["samples_drawn"] < 60

    def test_png_reproducible(self, tmp_path):
        rgb, _ = render_dynamical(-2.0, Rect(-1.0, 1.0, -1.0, 1.0), 12)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_png(rgb, a)
        save_png(rgb, b)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestRenderParameter:
    def test_left_strip_solid_period_one(self):
        rgb, meta = render_parameter(Rect(-5.0, -2.0, -1.0, 1.0), (30, 20),
                                     max_iter=400)
        assert (rgb == np.array(period_color(1), dtype=np.uint8)).all()
        assert meta["counts"] == {"attracting_1": 600}

    def test_ray_overlay_drawn(self):
        rgb, meta = render_parameter(
            Rect(-2.0, 31.0, -3.0, 9.0), (40, 16), max_iter=200,
            overlays=[A.parse("|1")], steps=30,
        )
        o = meta["overlays"][0]
        assert o["stalled"] is None
        assert o["samples_drawn"] >= 30
        color = np.array(OVERLAY_COLORS[0], dtype=np.uint8)
        assert (rgb == color).all(axis=2).any()

    def test_stalled_overlay_annotated(self):
        rgb, meta = render_parameter(
            Rect(0.0, 2.0, 0.5, 2.5), (20, 14), max_iter=300,
            overlays=[A.parse("|0,1,0")], steps=40,
        )
        o = meta["overlays"][0]
        assert o["stalled"] is not None
        assert o["stalled"]["error"] == "ContinuationStalled"
        assert 0.01 < o["stalled"]["t"] < 1.0
        assert o["samples_drawn"] > 0
