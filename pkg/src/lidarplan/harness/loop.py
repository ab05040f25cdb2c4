"""Closed-loop simulation: world -> perception -> planner -> control.

Every run writes a self-contained trace directory:

=================  ==========================================================
``scenario.copy``  the scenario YAML the run used
``world.csv``      ground truth per tick and vehicle (ego has id 0)
``clouds/``        optional per-frame point clouds (``.bin`` + ``.json``)
``detections.jsonl`` per-frame detector output (lidar mode)
``tracks.jsonl``   per-frame objects handed to the planner
``plans.csv``      per-tick planner decision and ground-truth gap
``timing.csv``     per-tick stage latencies in microseconds
``report.json``    run summary (no wall-clock values, so it is reproducible)
=================  ==========================================================
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import yaml

from ..geometry import box_corners, rects_overlap
from ..lidar import dump_cloud, scan
from ..perception import STAGES, detect_frame
from ..planner import Obstacle, extend_bounds, intersect_check, plan
from ..tracking import Tracker
from ..world import (EGO_ID, ScenarioConfig, apply_actuation, global_waypoints,
                     ground_truth_neighbors, load_scenario, make_world, scene_boxes,
                     speed_limit, step_world)
from ..world.config import scenario_to_dict
from .control import control

MODES = ("gt", "lidar")
REPORT_SCHEMA = 1

WORLD_FIELDS = ["tick", "time", "id", "x", "y", "yaw", "speed", "length", "width", "height"]
PLAN_FIELDS = ["tick", "time", "ego_x", "ego_y", "ego_yaw", "ego_speed", "v_limit", "case",
               "v_pre", "v_exc", "v_reach", "d_safe", "blocking_id", "blocking_distance",
               "blocking_speed", "blocking_yaw", "gap", "lead_id_gt", "lead_gap_gt",
               "lead_speed_gt", "path_len", "cf_len", "target_x", "target_y",
               "target_heading", "accel_cmd", "curvature_cmd", "collision", "n_objects"]
TIMING_STAGES = ["scan", *STAGES, "tracking", "perception_total", "path_generation",
                 "speed_planning", "planner_total", "tick_total"]


@dataclass
class RunResult:
    trace_dir: Path
    report: dict


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6f}"
    return str(v)


def frame_rngs(seed: int, tick: int):
    """Independent, per-frame random streams for the sensor and the detector."""
    return np.random.default_rng([seed, tick, 1]), np.random.default_rng([seed, tick, 2])


def gt_obstacles(world, radius: float) -> List[Obstacle]:
    return [Obstacle(v.position, v.yaw, v.box[0], v.box[1], v.speed, v.id)
            for v in ground_truth_neighbors(world, EGO_ID, radius)]


def ego_collides(world) -> bool:
    e = world.ego
    ego = box_corners(e.position, e.yaw, e.box[0], e.box[1])
    for v in world.vehicles:
        if abs(v.position[0] - e.position[0]) + abs(v.position[1] - e.position[1]) > 20:
            continue
        if rects_overlap(ego, v.corners()):
            return True
    for c in world.roadmap.clutter:
        if abs(c.center[0] - e.position[0]) + abs(c.center[1] - e.position[1]) > 20:
            continue
        if rects_overlap(ego, c.corners()):
            return True
    return False


def ground_truth_gap(world, trajectory: np.ndarray, cfg: ScenarioConfig):
    """Gap to the first ground-truth vehicle on the path, measured the way
    the planner measures it (unextended boxes)."""
    obs = gt_obstacles(world, cfg.planner.gt_radius + 10.0)
    if not obs:
        return None, None, None
    bounds = [extend_bounds(o.corners(), o.yaw, 0.0, 0.0, i).segments for i, o in enumerate(obs)]
    res = intersect_check(trajectory, bounds)
    if res.vehicle_index is None:
        return None, None, None
    o = obs[res.vehicle_index]
    return o.id, res.distance - cfg.planner.ego_front_clearance, o.speed


def _scenario_text(source) -> str:
    if isinstance(source, ScenarioConfig):
        return yaml.safe_dump(scenario_to_dict(source), sort_keys=False)
    p = Path(source)
    if p.exists():
        return p.read_text()
    return str(source)


def run_closed_loop(scenario: Union[str, Path, ScenarioConfig], mode: str = "gt",
                    seed: Optional[int] = None, out: Union[str, Path, None] = None,
                    duration: Optional[float] = None, save_clouds: bool = False,
                    progress: Optional[Callable[[int, int], None]] = None) -> RunResult:
    """Run one scenario and write its trace directory.

    ``seed`` overrides the scenario seed and ``duration`` its length. The
    run is deterministic for a given (scenario, seed, mode).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    cfg = scenario if isinstance(scenario, ScenarioConfig) else load_scenario(scenario)
    text = _scenario_text(scenario)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(seed))
    if duration is not None:
        cfg = dataclasses.replace(cfg, duration=float(duration))
    out = Path(out) if out is not None else Path(f"trace_{cfg.name}_{mode}_{cfg.seed}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.copy").write_text(text)
    if save_clouds:
        (out / "clouds").mkdir(exist_ok=True)

    world = make_world(cfg)
    tracker = Tracker(cfg.tracking)
    pc = cfg.planner
    n_ticks = cfg.n_ticks
    collisions = 0
    colliding = False
    skipped = 0
    cases: Dict[str, int] = {}

    with open(out / "world.csv", "w", newline="") as fw, \
            open(out / "plans.csv", "w", newline="") as fp, \
            open(out / "timing.csv", "w", newline="") as ft, \
            open(out / "detections.jsonl", "w") as fd, \
            open(out / "tracks.jsonl", "w") as ftr:
        ww, wp, wt = csv.writer(fw), csv.writer(fp), csv.writer(ft)
        ww.writerow(WORLD_FIELDS)
        wp.writerow(PLAN_FIELDS)
        wt.writerow(["tick", *TIMING_STAGES])
        for tick in range(n_ticks):
            t_tick = time.perf_counter()
            e = world.ego
            pose = (e.position[0], e.position[1], e.yaw)
            for v in world.all_states():
                ww.writerow([_fmt(x) for x in (tick, world.time, v.id, v.position[0],
                                               v.position[1], v.yaw, v.speed, *v.box)])
            timing = dict.fromkeys(TIMING_STAGES, 0.0)

            # perception
            t0 = time.perf_counter()
            if mode == "lidar":
                rng_scan, rng_det = frame_rngs(cfg.seed, tick)
                cloud = scan(scene_boxes(world), pose, cfg.lidar, rng_scan,
                             cfg.map.ground.slope, world.time, tick)
                t1 = time.perf_counter()
                timing["scan"] = (t1 - t0) * 1e6
                if save_clouds:
                    dump_cloud(out / "clouds" / f"{tick:06d}", cloud, pose, cfg.lidar)
                frame = detect_frame(cloud, cfg.perception, rng_det)
                skipped += int(frame.skipped)
                timing.update(frame.durations_us)
                t2 = time.perf_counter()
                objects = tracker.step(frame.detections, pose, world.time)
                t3 = time.perf_counter()
                timing["tracking"] = (t3 - t2) * 1e6
                timing["perception_total"] = (t3 - t1) * 1e6
                obstacles = [Obstacle(o.center, o.yaw, o.extent[0], o.extent[1], o.speed, o.id)
                             for o in objects]
                rec = frame.to_record()
                rec["tick"] = tick
                fd.write(json.dumps(rec, sort_keys=True) + "\n")
                track_recs = [o.to_record() for o in objects]
            else:
                obstacles = gt_obstacles(world, pc.gt_radius)
                timing["perception_total"] = (time.perf_counter() - t0) * 1e6
                track_recs = [{"id": o.id, "state": [round(o.center[0], 6), round(o.center[1], 6),
                                                     round(o.yaw, 6), round(o.speed, 6), 0.0],
                               "extent": [o.length, o.width], "static": o.speed < pc.static_speed,
                               "status": "ground_truth"} for o in obstacles]
            ftr.write(json.dumps({"tick": tick, "time": round(world.time, 6),
                                  "tracks": track_recs}, sort_keys=True) + "\n")

            # planning
            t4 = time.perf_counter()
            v_lim = speed_limit(world)
            horizon = max(pc.horizon_floor, e.speed / (2 * pc.mu * pc.g),
                          e.speed ** 2 / (2 * pc.mu * pc.g)) * pc.f_safe + 2 * pc.d_wp
            gwp = global_waypoints(world, EGO_ID, horizon, pc.d_wp)
            result = plan(pose, e.speed, gwp.points, obstacles, pc, v_lim)
            t5 = time.perf_counter()
            timing["path_generation"] = result.durations_us["path_generation"]
            timing["speed_planning"] = result.durations_us["speed_planning"]
            timing["planner_total"] = (t5 - t4) * 1e6

            # control; steer along the uncut path so a blocked path still steers
            traj = result.trajectory.points
            k = min(pc.pose_lookahead, len(traj) - 1)
            cmd = control(e.speed, result.v_exc, traj[k], cfg.control)

            lead_id, lead_gap, lead_speed = ground_truth_gap(world, traj, cfg)
            hit = ego_collides(world)
            if hit and not colliding:
                collisions += 1
            colliding = hit
            b = result.blocking
            blocking_id = obstacles[b.vehicle_index].id if b is not None else None
            sd = result.speed
            cases[sd.case] = cases.get(sd.case, 0) + 1
            wp.writerow([_fmt(x) for x in (
                tick, world.time, e.position[0], e.position[1], e.yaw, e.speed, v_lim,
                sd.case, sd.v_pre, sd.v_exc, sd.v_reach, sd.d_safe, blocking_id,
                b.distance if b else None, b.speed if b else None, b.yaw if b else None,
                sd.gap, lead_id, lead_gap, lead_speed, float(result.trajectory.cum_arc[-1]),
                float(result.collision_free_path.cum_arc[-1]), *result.target_pose,
                cmd.accel, cmd.steer, hit, len(obstacles))])

            world = step_world(apply_actuation(world, cmd.accel, cmd.steer), cfg.sim_dt)
            timing["tick_total"] = (time.perf_counter() - t_tick) * 1e6
            wt.writerow([tick] + [f"{timing[s]:.1f}" for s in TIMING_STAGES])
            if progress is not None:
                progress(tick + 1, n_ticks)

    report = {
        "schema_version": REPORT_SCHEMA,
        "scenario": cfg.name,
        "mode": mode,
        "seed": cfg.seed,
        "ticks": n_ticks,
        "sim_dt": cfg.sim_dt,
        "collision_count": collisions,
        "skipped_frames": skipped,
        "planner_cases": dict(sorted(cases.items())),
        "final_time": round(world.time, 6),
        "ego_distance_travelled": None,
    }
    from .metrics import following_summary, load_plans
    plans = load_plans(out)
    report["ego_distance_travelled"] = round(float(np.sum(
        np.hypot(np.diff(plans["ego_x"]), np.diff(plans["ego_y"])))), 3)
    report["following"] = following_summary(plans)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return RunResult(out, report)
