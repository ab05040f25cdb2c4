import dataclasses
import math

import numpy as np
import pytest

from lidarplan.world import (ScenarioError, bundled_scenarios, global_waypoints,
                             ground_truth_neighbors, load_scenario, make_world, step_world)
from lidarplan.world.config import VehicleSpec


def test_minimal_config_defaults(straight_text):
    cfg = load_scenario(straight_text)
    assert cfg.sim_dt == 0.05
    assert cfg.traffic == ()
    assert cfg.n_ticks == 40


def test_load_twice_is_equal(straight_text):
    assert load_scenario(straight_text) == load_scenario(straight_text)


def test_negative_box_length_names_field(straight_text):
    text = straight_text + "traffic:\n  - {id: 1, lane: main, s0: 10.0, box: [-4.5, 1.9, 1.5]}\n"
    with pytest.raises(ScenarioError, match="box"):
        load_scenario(text)


def test_unknown_key_is_rejected(straight_text):
    with pytest.raises(ScenarioError, match="colour"):
        load_scenario(straight_text + "colour: red\n")


def test_yaml_syntax_error_reports_line():
    with pytest.raises(ScenarioError) as info:
        load_scenario("name: x\nmap: [unclosed\n")
    assert info.value.line is not None


@pytest.mark.parametrize("name", bundled_scenarios())
def test_bundled_scenarios_load(name):
    from lidarplan.world import bundled_scenario_path
    cfg = load_scenario(bundled_scenario_path(name))
    assert cfg.name == name
    make_world(cfg)


def _with_vehicle(text, **kw):
    cfg = load_scenario(text)
    return make_world(dataclasses.replace(cfg, traffic=(VehicleSpec(id=1, lane="main", **kw),)))


def test_vehicle_advances_v_dt(straight_text):
    w = step_world(_with_vehicle(straight_text, s0=0.0, v0=10.0), 0.05)
    assert w.vehicles[0].position == pytest.approx((0.5, 0.0), abs=1e-12)


def test_zero_speed_is_fixed_point(straight_text):
    w0 = _with_vehicle(straight_text, s0=20.0, v0=0.0)
    w1 = step_world(w0, 0.05)
    assert w1.vehicles[0] == w0.vehicles[0]
    assert w1.ego.position == w0.ego.position


def test_route_end_clamps(straight_text):
    w = step_world(_with_vehicle(straight_text, s0=199.9, v0=10.0), 0.05)
    v = w.vehicles[0]
    assert v.position[0] == pytest.approx(200.0)
    assert v.speed == 0.0


def test_step_rejects_nonpositive_dt(straight_text):
    with pytest.raises(ValueError):
        step_world(make_world(load_scenario(straight_text)), 0.0)


def test_neighbors_ahead_and_range(straight_text):
    w = _with_vehicle(straight_text, s0=10.0)
    (v,) = ground_truth_neighbors(w, 0, 20.0)
    assert v.position == pytest.approx((10.0, 0.0))
    w = _with_vehicle(straight_text, s0=25.0)
    assert ground_truth_neighbors(w, 0, 20.0) == []


def test_neighbors_with_rotated_ego():
    text = """
schema_version: 1
map:
  lanes:
    - {id: north, type: straight, start: [0.0, 0.0], heading_deg: 90.0, length: 100.0}
ego: {route: [north]}
traffic:
  - {id: 1, lane: north, s0: 10.0}
"""
    (v,) = ground_truth_neighbors(make_world(load_scenario(text)), 0, 20.0)
    assert v.position == pytest.approx((10.0, 0.0), abs=1e-9)
    assert v.yaw == pytest.approx(0.0, abs=1e-12)


def test_global_waypoints_straight(straight_text):
    w = make_world(load_scenario(straight_text))
    gw = global_waypoints(w, 0, 10.0, 2.0)
    assert np.allclose(gw.points, [[2, 0], [4, 0], [6, 0], [8, 0], [10, 0]])
    assert len(global_waypoints(w, 0, 0.0, 2.0).points) == 0


def test_global_waypoints_past_route_end(straight_text):
    cfg = load_scenario(straight_text)
    cfg = dataclasses.replace(cfg, ego=dataclasses.replace(cfg.ego, s0=195.0))
    gw = global_waypoints(make_world(cfg), 0, 20.0, 2.0)
    assert gw.end_of_route
    assert len(gw.points) == 2


def test_scripted_vehicles_stay_on_centerline():
    from lidarplan.world import bundled_scenario_path
    cfg = load_scenario(bundled_scenario_path("mixed"))
    w = make_world(cfg)
    for _ in range(200):
        w = step_world(w, cfg.sim_dt)
    for s in w.scripted:
        lane = w.roadmap.lanes[s.lane]
        pos, _ = lane.pose_at(s.s)
        v = next(v for v in w.vehicles if v.id == s.id)
        assert math.dist(pos[0], v.position) < 1e-9


def test_stepping_is_deterministic():
    from lidarplan.world import bundled_scenario_path
    cfg = load_scenario(bundled_scenario_path("smoke"))
    runs = []
    for _ in range(2):
        w = make_world(cfg)
        for _ in range(50):
            w = step_world(w, cfg.sim_dt)
        runs.append(w.all_states())
    assert runs[0] == runs[1]
