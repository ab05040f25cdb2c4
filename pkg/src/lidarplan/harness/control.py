"""Proportional speed control and pure-pursuit steering."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..world.config import ControlConfig


@dataclass(frozen=True)
class ControlCommand:
    target_speed: float
    steer: float  # path curvature, 1/m
    accel: float


def pure_pursuit(target_xy, min_lookahead: float, max_curvature: float) -> float:
    """Curvature of the arc from the ego origin (heading +x) through ``target_xy``."""
    x, y = target_xy
    d2 = x * x + y * y
    if d2 < min_lookahead * min_lookahead:
        return 0.0
    k = 2.0 * y / d2
    return max(-max_curvature, min(max_curvature, k))


def control(v_current: float, target_speed: float, steer_target_xy,
            cfg: ControlConfig) -> ControlCommand:
    accel = cfg.speed_gain * (target_speed - v_current)
    accel = max(-cfg.max_decel, min(cfg.max_accel, accel))
    kappa = pure_pursuit(steer_target_xy, cfg.min_lookahead, cfg.max_curvature)
    return ControlCommand(target_speed, kappa, accel)
