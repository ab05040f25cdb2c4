"""Search-based L-shape rectangle fitting on the bird's-eye-view convex hull."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..geometry import box_corners, convex_hull


class DegenerateCluster(ValueError):
    """The cluster's BEV hull has fewer than three vertices."""


@dataclass(frozen=True)
class LShapeFit:
    yaw: float
    extent: Tuple[float, float]
    corners: np.ndarray
    center: Tuple[float, float]


def closeness_scores(hull: np.ndarray, angles: np.ndarray, sensor=(0.0, 0.0)) -> np.ndarray:
    """Sum of squared distances from hull vertices to the nearer of the two
    rectangle edges meeting at the corner closest to the sensor, per angle."""
    rel = hull - np.asarray(sensor, dtype=float)
    c, s = np.cos(angles)[:, None], np.sin(angles)[:, None]
    u = c * rel[None, :, 0] + s * rel[None, :, 1]
    v = -s * rel[None, :, 0] + c * rel[None, :, 1]
    umin, umax = u.min(axis=1, keepdims=True), u.max(axis=1, keepdims=True)
    vmin, vmax = v.min(axis=1, keepdims=True), v.max(axis=1, keepdims=True)
    ua = np.where(np.abs(umin) <= np.abs(umax), umin, umax)
    va = np.where(np.abs(vmin) <= np.abs(vmax), vmin, vmax)
    d = np.minimum(np.abs(u - ua), np.abs(v - va))
    return (d * d).sum(axis=1)


def rectangle_at(points2d: np.ndarray, theta: float) -> LShapeFit:
    """Tight rectangle around ``points2d`` with one side along ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    u = points2d @ np.array([c, s])
    v = points2d @ np.array([-s, c])
    lu, lv = float(u.max() - u.min()), float(v.max() - v.min())
    mu, mv = 0.5 * float(u.max() + u.min()), 0.5 * float(v.max() + v.min())
    center = (mu * c - mv * s, mu * s + mv * c)
    if lu >= lv:
        yaw, length, width = theta, lu, lv
    else:
        yaw, length, width = theta + 0.5 * math.pi, lv, lu
    yaw = (yaw + 0.5 * math.pi) % math.pi - 0.5 * math.pi
    corners = box_corners(center, yaw, length, width)
    return LShapeFit(yaw, (length, width), corners, center)


def l_shape_fit(points, step_deg: float = 1.0, sensor=(0.0, 0.0)) -> LShapeFit:
    """Fit an oriented rectangle to a cluster seen from ``sensor``.

    Points are projected to BEV and reduced to their convex hull. Headings in
    [0, 90) degrees at ``step_deg`` are scored with :func:`closeness_scores`
    and the tight rectangle at the best heading is returned, with yaw in
    [-pi/2, pi/2) chosen so that length >= width.
    """
    pts = np.asarray(points, dtype=float)
    bev = pts[:, :2]
    hull = convex_hull(bev)
    if len(hull) < 3:
        raise DegenerateCluster(f"hull has {len(hull)} vertices")
    angles = np.radians(np.arange(0.0, 90.0, step_deg))
    scores = closeness_scores(hull, angles, sensor)
    return rectangle_at(hull, float(angles[int(np.argmin(scores))]))
