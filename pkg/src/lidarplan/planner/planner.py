"""Local planner entry point: one call per control tick."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..world.config import PlannerConfig
from .collision import Blocking, Obstacle, VBound, generate_collision_free_path
from .path import (EgoTrajectory, braking_distance, bspline_resample, to_ego_frame,
                   waypoint_count)
from .speed import SpeedDecision, plan_speed


@dataclass(frozen=True)
class PlanResult:
    collision_free_path: EgoTrajectory
    trajectory: EgoTrajectory
    blocking: Optional[Blocking]
    v_exc: float
    target_pose: Tuple[float, float, float]
    speed: SpeedDecision
    bounds: Tuple[VBound, ...] = ()
    truncated_waypoints: bool = False
    durations_us: Dict[str, float] = field(default_factory=dict)


def _pose_on(traj: EgoTrajectory, index: int) -> Tuple[float, float, float]:
    pts = traj.points
    i = min(index, len(pts) - 1)
    if len(pts) < 2:
        return float(pts[0, 0]), float(pts[0, 1]), 0.0
    a, b = (pts[i - 1], pts[i]) if i > 0 else (pts[0], pts[1])
    return float(pts[i, 0]), float(pts[i, 1]), math.atan2(b[1] - a[1], b[0] - a[0])


def plan(ego_pose, v_ego: float, global_wps, obstacles: Sequence[Obstacle],
         cfg: PlannerConfig, v_max: float) -> PlanResult:
    """Resample the route ahead, cut it at the first blocking vehicle and
    choose a speed."""
    t0 = time.perf_counter()
    v_lim = min(v_max, cfg.v_max) if cfg.v_max else v_max
    d = max(braking_distance(v_ego, cfg.mu, cfg.g, cfg.braking_model), cfg.horizon_floor)
    gw = np.asarray(global_wps, dtype=float).reshape(-1, 2)
    m, truncated = waypoint_count(d, cfg.d_wp, cfg.f_safe, len(gw))
    ego_wps = np.vstack([[0.0, 0.0], to_ego_frame(gw[:m], ego_pose)])
    traj = bspline_resample(ego_wps, cfg.t_s)
    blocking, cf_pts, bounds = generate_collision_free_path(obstacles, traj.points, cfg.t_est)
    cf = EgoTrajectory(cf_pts, traj.cum_arc[:len(cf_pts)], traj.passthrough)
    t1 = time.perf_counter()

    idx = min(cfg.pose_lookahead, len(cf) - 1)
    target = _pose_on(cf, idx)
    d_pose = float(cf.cum_arc[idx])
    d_reach = v_ego * cfg.dt
    decision = plan_speed(blocking, v_ego, cfg, v_lim, d_pose, d_reach)
    t2 = time.perf_counter()
    return PlanResult(cf, traj, blocking, decision.v_exc, target, decision, tuple(bounds),
                      truncated, {"path_generation": (t1 - t0) * 1e6,
                                  "speed_planning": (t2 - t1) * 1e6})
