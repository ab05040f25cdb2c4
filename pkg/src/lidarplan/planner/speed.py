"""Three-case speed planning with a reachable-speed clamp."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..geometry import wrap_angle
from ..world.config import PlannerConfig
from .collision import Blocking
from .path import braking_distance

NORMAL, OBSTACLE, PLATOON = "normal", "obstacle", "platoon"


@dataclass(frozen=True)
class SpeedDecision:
    case: str
    v_pre: float
    v_exc: float
    v_reach: float
    d_safe: float
    gap: Optional[float] = None


def safe_distance(v: float, cfg: PlannerConfig) -> float:
    return braking_distance(v, cfg.mu, cfg.g, cfg.braking_model) + cfg.d_buffer


def speed_normal(v_current: float, d_pose: float, d_reach: float, dt: float) -> float:
    return v_current + (d_pose - d_reach) * dt


def speed_obstacle(d_obs: float, d_safe: float, v_appr: float) -> float:
    return v_appr + (d_obs - d_safe) / d_safe * v_appr


def speed_platoon(v_lead: float, d_lead: float, d_safe: float, w: float, dt: float) -> float:
    return v_lead + w * (d_lead - d_safe) * dt


def reachable_speed(v_current: float, a_max: float, dt: float, v_init: float,
                    v_max: float) -> float:
    """Next-step reachable speed, kept inside [v_init, v_max] (v_max wins)."""
    return min(max(v_current + a_max * dt, v_init), v_max)


def clamp_speed(v_pre: float, v_reach: float) -> float:
    if v_pre < 0:
        return 0.0
    if v_pre < v_reach:
        return v_pre
    return v_reach


def is_leader(blocking: Blocking, cfg: PlannerConfig) -> bool:
    aligned = abs(wrap_angle(blocking.yaw)) < math.radians(cfg.align_threshold_deg)
    return aligned and blocking.speed > cfg.static_speed


def plan_speed(blocking: Optional[Blocking], v_current: float, cfg: PlannerConfig,
               v_max: float, d_pose: float = 0.0, d_reach: float = 0.0) -> SpeedDecision:
    """Pick the speed case and clamp.

    The blocking distance runs from the ego's centre; the ego's front
    clearance is taken off before it enters the gap terms.
    """
    if v_current < 0:
        raise ValueError("v_current must be >= 0")
    d_safe = safe_distance(v_current, cfg)
    v_reach = reachable_speed(v_current, cfg.a_max, cfg.dt, cfg.v_init, v_max)
    gap = None
    if blocking is None:
        case = NORMAL
        v_pre = speed_normal(v_current, d_pose, d_reach, cfg.dt)
    else:
        gap = blocking.distance - cfg.ego_front_clearance
        if is_leader(blocking, cfg):
            case = PLATOON
            v_pre = speed_platoon(blocking.speed, gap, d_safe, cfg.w, cfg.dt)
        else:
            case = OBSTACLE
            v_pre = speed_obstacle(gap, d_safe, cfg.v_appr)
    return SpeedDecision(case, v_pre, clamp_speed(v_pre, v_reach), v_reach, d_safe, gap)
