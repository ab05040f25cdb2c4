import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lidarplan.geometry import (box_corners, convex_hull, ego_to_map, map_to_ego,
                                point_segment_distance, polygon_area, rect_iou, rects_overlap,
                                segment_hits_polyline, segment_intersect, wrap_angle)

coord = st.floats(-50, 50, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


def _sample_hit(a, b, n=4001):
    """Brute force: densely sample a and look for a point on b."""
    (ax, ay), (bx, by) = a
    t = np.linspace(0, 1, n)
    pts = np.column_stack((ax + t * (bx - ax), ay + t * (by - ay)))
    d = np.array([point_segment_distance(p, b) for p in pts])
    return d.min()


def test_crossing_segments():
    assert segment_intersect(((0, 0), (2, 0)), ((1, -1), (1, 1))) == (1.0, 0.0)


def test_parallel_disjoint():
    assert segment_intersect(((0, 0), (2, 0)), ((0, 1), (2, 1))) is None


def test_collinear_overlap_returns_nearest_overlap_point():
    a, b = ((0, 0), (2, 0)), ((1, 0), (3, 0))
    assert segment_intersect(a, b) == (1.0, 0.0)
    assert _sample_hit(a, b) < 1e-9


def test_touching_endpoint_counts():
    assert segment_intersect(((0, 0), (1, 1)), ((1, 1), (2, 0))) == (1.0, 1.0)


@given(coord, coord, coord, coord, coord, coord, coord, coord)
def test_intersection_point_lies_on_both(a0, a1, a2, a3, b0, b1, b2, b3):
    a, b = ((a0, a1), (a2, a3)), ((b0, b1), (b2, b3))
    p = segment_intersect(a, b)
    if p is not None:
        assert point_segment_distance(p, a) < 1e-6
        assert point_segment_distance(p, b) < 1e-6


def test_intersection_agrees_with_sampling_oracle():
    rng = np.random.default_rng(4)
    for _ in range(300):
        a = tuple(map(tuple, rng.uniform(-5, 5, (2, 2))))
        b = tuple(map(tuple, rng.uniform(-5, 5, (2, 2))))
        found = segment_intersect(a, b) is not None
        gap = _sample_hit(a, b)
        if gap > 1e-2:
            assert not found
        if found:
            assert gap < 1e-2


def test_polyline_mask_matches_scalar_test():
    rng = np.random.default_rng(5)
    for _ in range(200):
        poly = np.cumsum(rng.uniform(-1, 2, (8, 2)), axis=0)
        seg = tuple(map(tuple, rng.uniform(0, 8, (2, 2))))
        mask = segment_hits_polyline(seg, poly)
        ref = [segment_intersect(seg, (tuple(poly[i]), tuple(poly[i + 1]))) is not None
               for i in range(len(poly) - 1)]
        assert mask.tolist() == ref


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=30), coord, coord, angle)
def test_frame_round_trip(points, ex, ey, yaw):
    back = ego_to_map(map_to_ego(points, (ex, ey), yaw), (ex, ey), yaw)
    assert np.allclose(back, np.asarray(points, float), atol=1e-9)


def test_map_to_ego_quarter_turn():
    # a point 10 m north of an ego facing north is straight ahead
    assert np.allclose(map_to_ego([(0, 10)], (0, 0), math.pi / 2), [(10, 0)])


@given(st.floats(-100, 100, allow_nan=False))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi <= w < math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_convex_hull_square_with_interior_points():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.2, 0.7), (0.5, 0)]
    hull = convex_hull(pts)
    assert len(hull) == 4
    assert polygon_area(hull) == pytest.approx(1.0)


def test_iou_lateral_shift():
    a = box_corners((0, 0), 0.0, 4.0, 2.0)
    b = box_corners((0, 1), 0.0, 4.0, 2.0)
    assert rect_iou(a, b) == pytest.approx(4 / 12, abs=1e-12)


@given(coord, coord, angle, st.floats(0.5, 6), st.floats(0.5, 3))
def test_iou_with_itself_is_one(x, y, yaw, length, width):
    box = box_corners((x, y), yaw, length, width)
    assert rect_iou(box, box) == pytest.approx(1.0, abs=1e-9)


def test_rects_overlap_touching_is_not_overlap():
    a = box_corners((0, 0), 0.0, 2, 2)
    assert not rects_overlap(a, box_corners((2, 0), 0.0, 2, 2))
    assert rects_overlap(a, box_corners((1.9, 0), 0.3, 2, 2))
