"""Road network: polyline lane centerlines with arc-length parameterisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ..geometry import polyline_arclength
from .config import LaneSpec, MapSpec


@dataclass(frozen=True)
class Lane:
    id: str
    points: np.ndarray
    closed: bool
    width: float
    speed_limit: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if self.closed and np.hypot(*(pts[0] - pts[-1])) > 1e-9:
            pts = np.vstack([pts, pts[:1]])
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_s", polyline_arclength(pts))

    @property
    def length(self) -> float:
        return float(self._s[-1])

    @property
    def s(self) -> np.ndarray:
        return self._s

    def normalize_s(self, s):
        if self.closed:
            return np.mod(s, self.length)
        return np.clip(s, 0.0, self.length)

    def pose_at(self, s) -> Tuple[np.ndarray, np.ndarray]:
        """Positions (N,2) and per-segment tangent yaw (N,) at arc lengths s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        s = self.normalize_s(s)
        idx = np.searchsorted(self._s, s, side="right") - 1
        idx = np.clip(idx, 0, len(self._s) - 2)
        seg_len = self._s[idx + 1] - self._s[idx]
        t = np.where(seg_len > 0, (s - self._s[idx]) / np.where(seg_len > 0, seg_len, 1.0), 0.0)
        p0 = self.points[idx]
        p1 = self.points[idx + 1]
        pos = p0 + (p1 - p0) * t[:, None]
        yaw = np.arctan2(p1[:, 1] - p0[:, 1], p1[:, 0] - p0[:, 0])
        return pos, yaw

    def project(self, xy, s_hint=None, window: float = 25.0) -> float:
        """Arc length of the closest point on the lane, searched near ``s_hint``."""
        p = np.asarray(xy, dtype=float)
        a = self.points[:-1]
        b = self.points[1:]
        d = b - a
        L2 = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        proj = a + d * t[:, None]
        dist = np.hypot(proj[:, 0] - p[0], proj[:, 1] - p[1])
        s_cand = self._s[:-1] + t * np.sqrt(L2)
        if s_hint is not None:
            if self.closed:
                ds = np.abs((s_cand - s_hint + 0.5 * self.length) % self.length - 0.5 * self.length)
            else:
                ds = np.abs(s_cand - s_hint)
            dist = np.where(ds <= window, dist, np.inf)
            if not np.isfinite(dist).any():
                dist = np.hypot(proj[:, 0] - p[0], proj[:, 1] - p[1])
        return float(s_cand[int(np.argmin(dist))])


def _ring_points(center, size, radius, step) -> np.ndarray:
    """Counter-clockwise rounded rectangle starting mid-way along the bottom edge."""
    cx, cy = center
    hx, hy = 0.5 * size[0], 0.5 * size[1]
    r = radius
    pts = []

    def line(p0, p1):
        n = max(1, int(math.ceil(math.hypot(p1[0] - p0[0], p1[1] - p0[1]) / step)))
        for k in range(n):
            u = k / n
            pts.append((p0[0] + u * (p1[0] - p0[0]), p0[1] + u * (p1[1] - p0[1])))

    def arc(c, a0):
        if r <= 0:
            return
        n = max(2, int(math.ceil(0.5 * math.pi * r / step)))
        for k in range(n):
            a = a0 + 0.5 * math.pi * k / n
            pts.append((c[0] + r * math.cos(a), c[1] + r * math.sin(a)))

    line((cx, cy - hy), (cx + hx - r, cy - hy))
    arc((cx + hx - r, cy - hy + r), -0.5 * math.pi)
    line((cx + hx, cy - hy + r), (cx + hx, cy + hy - r))
    arc((cx + hx - r, cy + hy - r), 0.0)
    line((cx + hx - r, cy + hy), (cx - hx + r, cy + hy))
    arc((cx - hx + r, cy + hy - r), 0.5 * math.pi)
    line((cx - hx, cy + hy - r), (cx - hx, cy - hy + r))
    arc((cx - hx + r, cy - hy + r), math.pi)
    line((cx - hx + r, cy - hy), (cx, cy - hy))
    return np.array(pts)


def _offset_polyline(points: np.ndarray, offset: float, closed: bool) -> np.ndarray:
    """Shift a polyline sideways (left positive) using mitred vertex normals."""
    pts = np.asarray(points, dtype=float)
    if closed and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    n = len(pts)
    if closed:
        d_in = pts - np.roll(pts, 1, axis=0)
        d_out = np.roll(pts, -1, axis=0) - pts
    else:
        d = np.diff(pts, axis=0)
        d_in = np.vstack([d[:1], d])
        d_out = np.vstack([d, d[-1:]])

    def unit_left(v):
        L = np.hypot(v[:, 0], v[:, 1])[:, None]
        u = v / np.where(L > 0, L, 1.0)
        return np.column_stack((-u[:, 1], u[:, 0]))

    n_in, n_out = unit_left(d_in), unit_left(d_out)
    m = n_in + n_out
    m /= np.hypot(m[:, 0], m[:, 1])[:, None]
    cos_half = np.einsum("ij,ij->i", m, n_out)
    out = pts + m * (offset / np.maximum(cos_half, 0.2))[:, None]
    assert len(out) == n
    return out


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u)


def build_lanes(spec: MapSpec) -> Dict[str, Lane]:
    lanes: Dict[str, Lane] = {}
    for ls in spec.lanes:
        lanes[ls.id] = _build_lane(ls, lanes)
    return lanes


def _build_lane(ls: LaneSpec, lanes: Dict[str, Lane]) -> Lane:
    closed = ls.closed
    if ls.type == "polyline":
        pts = np.array(ls.points, dtype=float)
    elif ls.type == "ring":
        pts = _ring_points(ls.center, ls.size, ls.corner_radius, ls.step)
        closed = True
    elif ls.type == "straight":
        h = math.radians(ls.heading_deg)
        n = max(1, int(math.ceil(ls.length / ls.step)))
        u = np.linspace(0.0, ls.length, n + 1)
        pts = np.column_stack((ls.start[0] + u * math.cos(h), ls.start[1] + u * math.sin(h)))
    elif ls.type == "offset":
        parent = lanes[ls.parent]
        closed = parent.closed
        pts = _offset_polyline(parent.points, ls.offset, closed)
    elif ls.type == "blend":
        src, dst = lanes[ls.source], lanes[ls.target]
        n = max(2, int(math.ceil(ls.blend_length / ls.step)))
        u = np.linspace(0.0, ls.blend_length, n + 1)
        pa, _ = src.pose_at(ls.source_s + u)
        pb, _ = dst.pose_at(ls.target_s + u)
        w = _smoothstep(u / ls.blend_length)[:, None]
        pts = (1.0 - w) * pa + w * pb
        if ls.tail > 0:
            m = max(1, int(math.ceil(ls.tail / ls.step)))
            ut = ls.blend_length + np.linspace(0.0, ls.tail, m + 1)[1:]
            pt, _ = dst.pose_at(ls.target_s + ut)
            pts = np.vstack([pts, pt])
        closed = False
    else:  # pragma: no cover - validated earlier
        raise ValueError(ls.type)
    return Lane(ls.id, pts, closed, ls.width, ls.speed_limit)


class Route:
    """Ordered concatenation of lanes, parameterised by arc length."""

    def __init__(self, lanes: Sequence[Lane]):
        self.lanes = list(lanes)
        if len(self.lanes) == 1:
            lane = self.lanes[0]
            self.lane = lane
            self._limits = [(lane.length, lane.speed_limit)]
        else:
            pts = [self.lanes[0].points]
            limits = [(self.lanes[0].length, self.lanes[0].speed_limit)]
            total = self.lanes[0].length
            for ln in self.lanes[1:]:
                p = ln.points
                if np.hypot(*(p[0] - pts[-1][-1])) < 1e-6:
                    p = p[1:]
                pts.append(p)
                total += ln.length
                limits.append((total, ln.speed_limit))
            self.lane = Lane("+".join(l.id for l in self.lanes), np.vstack(pts), False,
                             self.lanes[0].width, self.lanes[0].speed_limit)
            self._limits = limits

    @property
    def closed(self) -> bool:
        return self.lane.closed

    @property
    def length(self) -> float:
        return self.lane.length

    def speed_limit_at(self, s: float) -> float:
        if self.closed:
            return self._limits[0][1]
        for end, lim in self._limits:
            if s <= end:
                return lim
        return self._limits[-1][1]
