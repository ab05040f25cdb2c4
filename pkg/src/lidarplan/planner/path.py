"""Waypoint conversion, horizon sizing and arc-length resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline

from ..geometry import map_to_ego


class TooFewWaypoints(ValueError):
    pass


@dataclass(frozen=True)
class EgoTrajectory:
    points: np.ndarray
    cum_arc: np.ndarray
    passthrough: bool = False

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_points(cls, points, passthrough: bool = False) -> "EgoTrajectory":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
        return cls(pts, np.concatenate([[0.0], np.cumsum(seg)]), passthrough)


def to_ego_frame(global_wps, ego_pose) -> np.ndarray:
    """Map-frame waypoints into the ego frame (x along the ego heading)."""
    x, y, yaw = ego_pose
    return map_to_ego(global_wps, (x, y), yaw)


def braking_distance(v_ego: float, mu: float = 0.35, g: float = 9.8,
                     model: str = "paper") -> float:
    """Braking distance. ``paper`` divides speed (not its square) by 2 mu g."""
    if model == "paper":
        return v_ego / (2.0 * mu * g)
    if model == "kinematic":
        return v_ego * v_ego / (2.0 * mu * g)
    raise ValueError(f"unknown braking model {model!r}")


def waypoint_count(d: float, d_wp: float, f_safe: float, available: int | None = None):
    """Number of waypoints to convert, and whether it had to be truncated."""
    if d <= 0:
        return 0, False
    m = int(math.ceil(d / d_wp * f_safe - 1e-9))
    if available is not None and m > available:
        return int(available), True
    return m, False


def bspline_resample(ego_wps, t_s: float) -> EgoTrajectory:
    """Quadratic interpolating splines x(s), y(s) over chord length s,
    resampled so consecutive output points are ``t_s`` apart.

    Fewer than three distinct waypoints are passed through unchanged with
    the ``passthrough`` flag set.
    """
    pts = np.asarray(ego_wps, dtype=float).reshape(-1, 2)
    if len(pts) > 1:
        keep = np.concatenate([[True], np.hypot(*np.diff(pts, axis=0).T) > 1e-9])
        pts = pts[keep]
    if len(pts) < 3:
        return EgoTrajectory.from_points(pts, passthrough=True)
    chord = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
    spline = make_interp_spline(chord, pts, k=2)
    # a 1 cm polyline along the spline is within ~1e-7 m of the curve
    n_dense = max(16, int(math.ceil(chord[-1] / 0.01)))
    dense = spline(np.linspace(0.0, chord[-1], n_dense + 1))
    dense[0], dense[-1] = pts[0], pts[-1]
    return EgoTrajectory.from_points(_walk(dense, t_s))


def _walk(dense: np.ndarray, step: float) -> np.ndarray:
    """Points along a dense polyline, each exactly ``step`` from the previous."""
    out = [dense[0]]
    p = dense[0]
    j = 0
    n = len(dense)
    chunk = max(8, int(4 * step / max(np.hypot(*(dense[1] - dense[0])), 1e-9)))
    while True:
        found = False
        while j < n - 1:
            hi = min(n, j + 1 + chunk)
            d = np.hypot(dense[j + 1:hi, 0] - p[0], dense[j + 1:hi, 1] - p[1])
            k = np.flatnonzero(d >= step)
            if len(k):
                j_next = j + 1 + int(k[0])
                found = True
                break
            j = hi - 1
        if not found:
            break
        a, b = dense[j_next - 1], dense[j_next]
        # smallest t in [0, 1] with |a + t (b - a) - p| = step
        e, f = b - a, a - p
        qa, qb, qc = e @ e, 2.0 * (e @ f), f @ f - step * step
        disc = max(qb * qb - 4 * qa * qc, 0.0)
        t = (-qb + math.sqrt(disc)) / (2 * qa) if qa > 0 else 0.0
        p = a + min(max(t, 0.0), 1.0) * e
        out.append(p)
        j = j_next - 1
    if np.hypot(*(dense[-1] - out[-1])) > 1e-9:
        out.append(dense[-1])
    return np.array(out)
