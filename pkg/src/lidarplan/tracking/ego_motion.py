"""Ego-motion compensation of previous observations.

Observations are kept in an ego-centred, map-aligned frame (x east, y
north). Headings of travel are compass-style: 0 points along +y and pi/2
along +x, so a move of ``d`` metres shifts every static point by
``(-sin(theta) d, -cos(theta) d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EgoMotion:
    theta_ego: float
    v_ego: float
    dt: float
    # rotation between consecutive observation frames; zero for map-aligned frames
    frame_rotation: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")

    @property
    def distance(self) -> float:
        return self.v_ego * self.dt


def transform_matrix(theta: float, dx: float, dy: float) -> np.ndarray:
    """Homogeneous 2D rotation by ``theta`` followed by translation."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, dx], [s, c, dy], [0.0, 0.0, 1.0]])


def compensation_matrix(ego: EgoMotion) -> np.ndarray:
    d = ego.v_ego * ego.dt
    dx = -math.sin(ego.theta_ego) * d
    dy = -math.cos(ego.theta_ego) * d
    return transform_matrix(ego.frame_rotation, dx, dy)


def compensate_ego_motion(prev_points, ego: EgoMotion) -> np.ndarray:
    """Map previous-frame points into the current frame."""
    pts = np.asarray(prev_points, dtype=float).reshape(-1, 2)
    T = compensation_matrix(ego)
    return pts @ T[:2, :2].T + T[:2, 2]


def motion_from_poses(prev_xy, prev_yaw: float, cur_xy, cur_yaw: float, dt: float) -> EgoMotion:
    """EgoMotion between two exact map poses (map-aligned frames)."""
    dx = cur_xy[0] - prev_xy[0]
    dy = cur_xy[1] - prev_xy[1]
    d = math.hypot(dx, dy)
    theta = math.atan2(dx, dy) if d > 0 else 0.5 * math.pi - cur_yaw
    theta = (theta + math.pi) % (2 * math.pi) - math.pi
    return EgoMotion(theta, d / dt, dt)


def compensate_history(positions: Sequence, motions: Sequence[EgoMotion]) -> np.ndarray:
    """Bring ``positions[i]`` (each in frame i) into the last frame.

    ``motions[i]`` is the motion from frame i to frame i + 1.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(motions) != len(pos) - 1:
        raise ValueError("need exactly one motion between consecutive positions")
    out = pos.copy()
    for i, m in enumerate(motions):
        out[: i + 1] = compensate_ego_motion(out[: i + 1], m)
    return out
