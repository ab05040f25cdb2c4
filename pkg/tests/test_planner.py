import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidarplan.geometry import ego_to_map
from lidarplan.planner import (NORMAL, OBSTACLE, PLATOON, Blocking, Obstacle, bspline_resample,
                               braking_distance, clamp_speed, extend_bounds,
                               generate_collision_free_path, intersect_check,
                               intersect_check_verbatim, plan, plan_speed, reachable_speed,
                               safe_distance, speed_obstacle, speed_platoon, to_ego_frame,
                               waypoint_count)
from lidarplan.geometry import box_corners
from oracles import polyline_crosses, random_planner_instance
from lidarplan.world import PlannerConfig

CFG = PlannerConfig()


# --- waypoints and horizon ------------------------------------------------------

def test_to_ego_frame_examples():
    wps = np.array([[1.0, 2.0], [3.0, -1.0]])
    assert np.allclose(to_ego_frame(wps, (0, 0, 0)), wps)
    assert np.allclose(to_ego_frame([(5, 4)], (3, 4, 0)), [(2, 0)])


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-math.pi, math.pi))
def test_to_ego_round_trip(x, y, yaw):
    pts = np.array([[1.5, -2.0], [40.0, 3.0], [-7.0, 0.1]])
    back = to_ego_frame(ego_to_map(pts, (x, y), yaw), (x, y, yaw))
    assert np.allclose(back, pts, atol=1e-9)


def test_braking_distance_models():
    assert braking_distance(8.33) == pytest.approx(8.33 / 6.86, abs=1e-12)
    assert braking_distance(0.0) == 0.0
    assert braking_distance(8.33, model="kinematic") == pytest.approx(8.33 ** 2 / 6.86)
    with pytest.raises(ValueError):
        braking_distance(1.0, model="other")


def test_waypoint_count_examples():
    assert waypoint_count(20, 2, 1.5) == (15, False)
    assert waypoint_count(0, 2, 1.5) == (0, False)
    assert waypoint_count(20, 2, 1.5, available=8) == (8, True)


# --- resampling ------------------------------------------------------------

def test_resample_reproduces_line():
    wps = np.column_stack((np.arange(0, 21, 2.0), np.zeros(11)))
    traj = bspline_resample(wps, 0.5)
    assert np.allclose(traj.points[:, 0], np.arange(0, 20.5, 0.5), atol=1e-9)
    assert np.allclose(traj.points[:, 1], 0.0, atol=1e-9)


def test_too_few_waypoints_pass_through():
    traj = bspline_resample([(0, 0), (2, 0)], 0.5)
    assert traj.passthrough
    assert np.array_equal(traj.points, [[0, 0], [2, 0]])


@given(st.integers(0, 10_000), st.sampled_from([0.25, 0.5, 1.0]))
def test_resample_spacing(seed, t_s):
    rng = np.random.default_rng(seed)
    heading = np.cumsum(rng.normal(0, 0.3, 8))
    wps = np.vstack(([0, 0], np.cumsum(np.column_stack((np.cos(heading), np.sin(heading))) * 2,
                                       axis=0)))
    pts = bspline_resample(wps, t_s).points
    gaps = np.hypot(*np.diff(pts, axis=0).T)
    assert np.all(np.abs(gaps[:-1] - t_s) <= 1e-6)
    assert gaps[-1] <= t_s + 1e-6
    assert np.allclose(pts[0], wps[0]) and np.allclose(pts[-1], wps[-1])


# --- bounds and intersection ---------------------------------------------------

def _rect_of(vb):
    xs = [p[0] for s in vb.segments for p in s]
    ys = [p[1] for s in vb.segments for p in s]
    return min(xs), max(xs), min(ys), max(ys)


def test_extend_unit_square_forward():
    vb = extend_bounds(box_corners((0, 0), 0.0, 1, 1), 0.0, 5.0, 2.0)
    assert _rect_of(vb) == pytest.approx((-0.5, 10.5, -0.5, 0.5))


def test_extend_zero_speed_is_raw_box():
    raw = box_corners((2, 1), 0.4, 4.5, 1.9)
    vb = extend_bounds(raw, 0.4, 0.0, 1.0)
    assert sorted(map(tuple, np.round(vb.corners(), 12))) == \
        sorted(map(tuple, np.round(raw, 12)))


def test_extend_along_y_axis():
    raw = box_corners((0, 0), math.pi / 2, 1, 1)
    vb = extend_bounds(raw, math.pi / 2, 2.0, 1.0)
    front = vb.corners()[:2]
    assert np.allclose(front[:, 1], 2.5)
    assert np.allclose(np.sort(front[:, 0]), [-0.5, 0.5])
    assert _rect_of(vb) == pytest.approx((-0.5, 0.5, -0.5, 2.5))


STRAIGHT = np.column_stack((np.arange(0, 20.5, 0.5), np.zeros(41)))


def test_box_straddling_path_cuts_it():
    box = Obstacle((10.0, 0.0), 0.0, 4.0, 2.0)
    bounds = [extend_bounds(box.corners(), 0.0, 0.0, 1.0).segments]
    res = intersect_check(STRAIGHT, bounds)
    assert res.vehicle_index == 0 and res.truncated
    assert res.distance == pytest.approx(8.0)
    assert res.path[-1, 0] < 8.0
    # brute force: no remaining point lies inside the box
    assert np.all(res.path[:, 0] < 8.0)


def test_no_obstacle_and_obstacle_behind():
    res = intersect_check(STRAIGHT, [])
    assert res.vehicle_index is None and np.array_equal(res.path, STRAIGHT)
    behind = Obstacle((-10.0, 0.0), 0.0, 4.0, 2.0)
    res = intersect_check(STRAIGHT, [extend_bounds(behind.corners(), 0, 0, 1).segments])
    assert res.vehicle_index is None and not res.truncated


def test_fast_check_equals_literal_loop():
    rng = np.random.default_rng(11)
    for _ in range(300):
        traj, obs = random_planner_instance(rng)
        bounds = [extend_bounds(o.corners(), o.yaw, o.speed, 1.0, i).segments
                  for i, o in enumerate(obs)]
        a, b = intersect_check(traj, bounds), intersect_check_verbatim(traj, bounds)
        assert a.vehicle_index == b.vehicle_index
        assert a.distance == b.distance
        assert np.array_equal(a.path, b.path)


@given(st.integers(0, 2**31 - 1))
def test_collision_free_postcondition(seed):
    traj, obs = random_planner_instance(np.random.default_rng(seed))
    _, path, vbounds = generate_collision_free_path(obs, traj, 1.0)
    assert np.array_equal(path, traj[:len(path)])
    assert not polyline_crosses(path, [s for vb in vbounds for s in vb.segments])


def test_lead_vehicle_blocks():
    lead = Obstacle((12.0, 0.0), 0.02, 4.5, 1.9, 5.0, 7)
    blocking, path, _ = generate_collision_free_path([lead], STRAIGHT, 1.0)
    assert blocking.vehicle_index == 0
    assert blocking.speed == 5.0 and blocking.yaw == 0.02
    assert blocking.distance == pytest.approx(12.0 - 2.25, abs=0.05)
    assert len(path) < len(STRAIGHT)


def test_off_path_vehicle_ignored():
    near_off = Obstacle((6.0, 4.0), 0.0, 4.5, 1.9, 0.0, 1)
    on_path = Obstacle((15.0, 0.0), 0.0, 4.5, 1.9, 3.0, 2)
    blocking, _, _ = generate_collision_free_path([near_off, on_path], STRAIGHT, 1.0)
    assert blocking.vehicle_index == 1 and blocking.speed == 3.0
    blocking, path, _ = generate_collision_free_path([], STRAIGHT, 1.0)
    assert blocking is None and np.array_equal(path, STRAIGHT)


# --- speed -------------------------------------------------------------------

def test_speed_cases():
    d_safe = safe_distance(6.0, CFG)
    assert speed_obstacle(d_safe, d_safe, 3.0) == 3.0
    assert speed_platoon(8.0, d_safe, d_safe, CFG.w, CFG.dt) == 8.0
    assert clamp_speed(-1.0, 5.0) == 0.0
    assert clamp_speed(10.0, 5.0) == 5.0
    dec = plan_speed(None, 6.0, CFG, 8.33, d_pose=0.3, d_reach=0.3)
    assert dec.case == NORMAL and dec.v_pre == 6.0 and 0 <= dec.v_exc <= dec.v_reach


def test_case_selection():
    lead = Blocking(20.0, 5.0, 0.1, 0, (20.0, 0.0))
    assert plan_speed(lead, 5.0, CFG, 8.33).case == PLATOON
    crossing = Blocking(20.0, 5.0, 1.2, 0, (20.0, 0.0))
    assert plan_speed(crossing, 5.0, CFG, 8.33).case == OBSTACLE
    parked = Blocking(20.0, 0.1, 0.0, 0, (20.0, 0.0))
    assert plan_speed(parked, 5.0, CFG, 8.33).case == OBSTACLE


@given(st.floats(0, 15), st.floats(0, 15), st.floats(-60, 60), st.floats(-math.pi, math.pi),
       st.floats(0.5, 15), st.floats(0, 30), st.floats(0, 30))
def test_speed_clamp_bounds(v, v_lead, dist, yaw, v_max, d_pose, d_reach):
    b = Blocking(dist, v_lead, yaw, 0, (dist, 0.0)) if dist > 0 else None
    dec = plan_speed(b, v, CFG, v_max, d_pose, d_reach)
    cap = min(v_max, max(v + CFG.a_max * CFG.dt, CFG.v_init))
    assert 0.0 <= dec.v_exc <= cap
    assert dec.v_reach == reachable_speed(v, CFG.a_max, CFG.dt, CFG.v_init, v_max)


@given(st.floats(0, 40), st.floats(0, 40), st.floats(0.5, 30), st.floats(0.1, 10))
def test_monotone_caution(d1, d2, d_safe, v_appr):
    lo, hi = sorted((d1, d2))
    assert speed_obstacle(lo, d_safe, v_appr) <= speed_obstacle(hi, d_safe, v_appr)


def test_negative_speed_rejected():
    with pytest.raises(ValueError):
        plan_speed(None, -1.0, CFG, 8.33)


# --- whole plan ------------------------------------------------------------

def _route(offset=(0.0, 0.0)):
    # dyadic coordinates so integer shifts are exact in floating point
    s = np.arange(1, 31) * 2.0
    return np.column_stack((s + offset[0], s * s / 64 + offset[1]))


@settings(max_examples=25)
@given(st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_plan_translation_invariant(ox, oy):
    obs = [Obstacle((14.0, 1.0), 0.1, 4.5, 1.9, 4.0, 3)]
    a = plan((0.0, 0.0, 0.0), 5.0, _route(), obs, CFG, 8.33)
    b = plan((float(ox), float(oy), 0.0), 5.0, _route((ox, oy)), obs, CFG, 8.33)
    assert np.array_equal(a.trajectory.points, b.trajectory.points)
    assert np.array_equal(a.collision_free_path.points, b.collision_free_path.points)
    assert a.v_exc == b.v_exc and a.speed == b.speed


def test_plan_starts_at_ego_and_is_prefix():
    obs = [Obstacle((14.0, 14.0 ** 2 / 64), math.atan(28 / 64), 4.5, 1.9, 4.0, 3)]
    res = plan((0.0, 0.0, 0.0), 5.0, _route(), obs, CFG, 8.33)
    assert np.array_equal(res.trajectory.points[0], [0.0, 0.0])
    n = len(res.collision_free_path.points)
    assert np.array_equal(res.collision_free_path.points, res.trajectory.points[:n])
    assert res.speed.case == PLATOON
    assert res.trajectory.cum_arc[-1] >= CFG.horizon_floor
