"""Velocity-extended vehicle bounds and polyline intersection checking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..geometry import box_corners, point_segment_distance, segment_hits_polyline


@dataclass(frozen=True)
class VBound:
    vehicle_index: int
    segments: Tuple[Tuple[Tuple[float, float], Tuple[float, float]], ...]
    source: Tuple[float, float, Tuple[float, float]]  # (speed, yaw, position)

    def corners(self) -> np.ndarray:
        """The four corner points c1..c4 in segment order."""
        c1, c2 = self.segments[0]
        c3 = self.segments[1][1]
        c4 = self.segments[3][1]
        return np.array([c1, c2, c3, c4])


@dataclass(frozen=True)
class Obstacle:
    """A vehicle as the planner sees it, in the ego frame."""
    center: Tuple[float, float]
    yaw: float
    length: float
    width: float
    speed: float = 0.0
    id: int = -1

    def corners(self) -> np.ndarray:
        return box_corners(self.center, self.yaw, self.length, self.width)


@dataclass(frozen=True)
class CheckResult:
    vehicle_index: Optional[int]
    distance: Optional[float]
    path: np.ndarray
    truncated: bool


def extend_bounds(corners, yaw: float, speed: float, t_est: float,
                  vehicle_index: int = 0, position=None) -> VBound:
    """Push the two front corners forward by ``speed * t_est`` along ``yaw``.

    c1, c2 are the front corners and c3, c4 the rear ones, with c1 and c3 on
    the same side, so the segments c1c2, c1c3, c2c4 and c3c4 trace the
    rectangle.
    """
    pts = np.asarray(corners, dtype=float).reshape(4, 2)
    heading = np.array([math.cos(yaw), math.sin(yaw)])
    proj = pts @ heading
    order = np.argsort(-proj, kind="stable")
    front, rear = pts[order[:2]], pts[order[2:]]
    lateral = np.array([-heading[1], heading[0]])
    # consistent sides: index 0 is the left one
    if front[0] @ lateral < front[1] @ lateral:
        front = front[::-1]
    if rear[0] @ lateral < rear[1] @ lateral:
        rear = rear[::-1]
    ext = heading * speed * t_est
    c1, c2 = front[0] + ext, front[1] + ext
    c3, c4 = rear[0], rear[1]
    seg = lambda a, b: ((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))  # noqa: E731
    if position is None:
        position = tuple(pts.mean(axis=0))
    return VBound(vehicle_index, (seg(c1, c2), seg(c1, c3), seg(c2, c4), seg(c3, c4)),
                  (float(speed), float(yaw), (float(position[0]), float(position[1]))))


def intersect_check(rwp: np.ndarray, bounds: Sequence[Sequence]) -> CheckResult:
    """Trim the path from its far end until no bound segment crosses it.

    ``bounds`` holds one set of segments per vehicle. The blocking index is
    that of the last vehicle whose segment forced a trim, and ``distance``
    is from that segment to the first path point.
    """
    rwp = np.asarray(rwp, dtype=float).reshape(-1, 2)
    if len(rwp) == 0:
        raise ValueError("empty trajectory")
    n = len(rwp)
    v_index: Optional[int] = None
    distance: Optional[float] = None
    for vi, vbounds in enumerate(bounds):
        for seg in vbounds:
            if n < 2:
                break
            hits = segment_hits_polyline(seg, rwp[:n])
            if not hits.any():
                continue
            # popping the far end one point at a time removes the last edge
            # each time; the loop stops once the first hit edge is gone
            n = int(np.flatnonzero(hits)[0]) + 1
            v_index = vi
            distance = point_segment_distance(rwp[0], seg)
    return CheckResult(v_index, distance, rwp[:n].copy(), n < len(rwp))


def intersect_check_verbatim(rwp, bounds) -> CheckResult:
    """Literal pop-one-point-at-a-time loop; slow reference for tests."""
    rwp = np.asarray(rwp, dtype=float).reshape(-1, 2)
    cf = [tuple(p) for p in rwp]
    v_index = distance = None
    for vi, vbounds in enumerate(bounds):
        for seg in vbounds:
            while cf:
                lines = np.array(cf)
                if len(cf) >= 2 and segment_hits_polyline(seg, lines).any():
                    cf.pop()
                    v_index = vi
                    distance = point_segment_distance(rwp[0], seg)
                else:
                    break
    return CheckResult(v_index, distance, np.array(cf).reshape(-1, 2), len(cf) < len(rwp))


@dataclass(frozen=True)
class Blocking:
    distance: float
    speed: float
    yaw: float
    vehicle_index: int
    position: Tuple[float, float]


def generate_collision_free_path(vlist: Sequence[Obstacle], rwp: np.ndarray,
                                 t_est: float):
    """Build every vehicle's bounds, check the path and look up the blocker.

    Returns ``(blocking or None, collision-free path, bounds)``.
    """
    bounding: List[Tuple] = []
    info: List[Tuple[float, float, Tuple[float, float]]] = []
    vb_all: List[VBound] = []
    for i, v in enumerate(vlist):
        vb = extend_bounds(v.corners(), v.yaw, v.speed, t_est, i, v.center)
        vb_all.append(vb)
        bounding.append(vb.segments)
        info.append((v.speed, v.yaw, v.center))
    res = intersect_check(rwp, bounding)
    if res.vehicle_index is None:
        return None, res.path, vb_all
    speed, yaw, pos = info[res.vehicle_index]
    return Blocking(float(res.distance), float(speed), float(yaw), res.vehicle_index,
                    pos), res.path, vb_all
