"""Planar geometry helpers shared by the simulator, perception and planner."""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

Point = Tuple[float, float]
Segment = Tuple[Point, Point]

_EPS = 1e-12


def wrap_angle(a):
    """Wrap an angle (scalar or array) to [-pi, pi)."""
    if isinstance(a, np.ndarray):
        return (a + np.pi) % (2.0 * np.pi) - np.pi
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def map_to_ego(points, ego_xy, ego_yaw: float) -> np.ndarray:
    """Map-frame points into the ego frame (x along heading, y to the left)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    d = pts - np.asarray(ego_xy, dtype=float)
    c, s = math.cos(ego_yaw), math.sin(ego_yaw)
    return np.column_stack((c * d[:, 0] + s * d[:, 1], -s * d[:, 0] + c * d[:, 1]))


def ego_to_map(points, ego_xy, ego_yaw: float) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    c, s = math.cos(ego_yaw), math.sin(ego_yaw)
    x = c * pts[:, 0] - s * pts[:, 1] + ego_xy[0]
    y = s * pts[:, 0] + c * pts[:, 1] + ego_xy[1]
    return np.column_stack((x, y))


def box_corners(center, yaw: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise from front-left."""
    c, s = math.cos(yaw), math.sin(yaw)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.asarray(center, dtype=float)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """CCW convex hull vertices without repeats; collinear edge points dropped.

    Uses qhull for speed and Andrew's monotone chain for degenerate input.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        return pts
    try:
        return pts[ConvexHull(pts).vertices]
    except QhullError:
        return _monotone_chain(pts)


def _monotone_chain(pts: np.ndarray) -> np.ndarray:
    pts_l = [tuple(p) for p in pts]
    lower: list = []
    for p in pts_l:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts_l):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _orient(a, b, c) -> int:
    v = _cross(a, b, c)
    if abs(v) <= _EPS:
        return 0
    return 1 if v > 0 else -1


def _on_segment(a, b, p) -> bool:
    return (min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
            and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS)


def segment_intersect(a: Segment, b: Segment) -> Optional[Point]:
    """Intersection point of two closed segments, or None.

    Proper crossings and touching endpoints are both reported. For collinear
    overlapping segments the overlap endpoint closest to ``a``'s start is
    returned.
    """
    p1, p2 = a
    q1, q2 = b
    o1, o2 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    o3, o4 = _orient(q1, q2, p1), _orient(q1, q2, p2)

    if o1 == o2 == o3 == o4 == 0:
        cands = [p for p in (p1, p2) if _on_segment(q1, q2, p)]
        cands += [q for q in (q1, q2) if _on_segment(p1, p2, q)]
        if not cands:
            return None
        best = min(cands, key=lambda p: (p[0] - p1[0]) ** 2 + (p[1] - p1[1]) ** 2)
        return (float(best[0]), float(best[1]))

    if o1 != o2 and o3 != o4:
        pass
    elif o1 == 0 and _on_segment(p1, p2, q1):
        return (float(q1[0]), float(q1[1]))
    elif o2 == 0 and _on_segment(p1, p2, q2):
        return (float(q2[0]), float(q2[1]))
    elif o3 == 0 and _on_segment(q1, q2, p1):
        return (float(p1[0]), float(p1[1]))
    elif o4 == 0 and _on_segment(q1, q2, p2):
        return (float(p2[0]), float(p2[1]))
    else:
        return None

    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    denom = rx * sy - ry * sx
    if abs(denom) <= _EPS:
        return None
    t = ((q1[0] - p1[0]) * sy - (q1[1] - p1[1]) * sx) / denom
    t = min(max(t, 0.0), 1.0)
    return (float(p1[0] + t * rx), float(p1[1] + t * ry))


def segment_hits_polyline(seg, polyline: np.ndarray) -> np.ndarray:
    """Vectorised closed-segment test of ``seg`` against each polyline edge.

    Returns a boolean mask with one entry per polyline edge. Uses the same
    orientation predicates as :func:`segment_intersect`.
    """
    poly = np.asarray(polyline, dtype=float)
    if len(poly) < 2:
        return np.zeros(0, dtype=bool)
    (ax, ay), (bx, by) = seg
    px, py = poly[:-1, 0], poly[:-1, 1]
    qx, qy = poly[1:, 0], poly[1:, 1]

    def orient(x1, y1, x2, y2, x3, y3):
        v = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
        return np.where(np.abs(v) <= _EPS, 0, np.sign(v))

    def on_seg(x1, y1, x2, y2, x, y):
        return ((np.minimum(x1, x2) - _EPS <= x) & (x <= np.maximum(x1, x2) + _EPS)
                & (np.minimum(y1, y2) - _EPS <= y) & (y <= np.maximum(y1, y2) + _EPS))

    o1 = orient(ax, ay, bx, by, px, py)
    o2 = orient(ax, ay, bx, by, qx, qy)
    o3 = orient(px, py, qx, qy, ax, ay)
    o4 = orient(px, py, qx, qy, bx, by)
    hit = (o1 != o2) & (o3 != o4)
    hit |= (o1 == 0) & on_seg(ax, ay, bx, by, px, py)
    hit |= (o2 == 0) & on_seg(ax, ay, bx, by, qx, qy)
    hit |= (o3 == 0) & on_seg(px, py, qx, qy, ax, ay)
    hit |= (o4 == 0) & on_seg(px, py, qx, qy, bx, by)
    return hit


def point_segment_distance(p, seg) -> float:
    (ax, ay), (bx, by) = seg
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 <= _EPS:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _ensure_ccw(poly: np.ndarray) -> np.ndarray:
    x, y = poly[:, 0], poly[:, 1]
    signed = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    return poly if signed >= 0 else poly[::-1]


def convex_intersection(a, b) -> np.ndarray:
    """Sutherland-Hodgman clip of convex polygon ``a`` by convex polygon ``b``."""
    out = [tuple(p) for p in _ensure_ccw(np.asarray(a, dtype=float))]
    clip = _ensure_ccw(np.asarray(b, dtype=float))
    n = len(clip)
    for i in range(n):
        if not out:
            break
        c1, c2 = clip[i], clip[(i + 1) % n]
        inp, out = out, []
        for j in range(len(inp)):
            cur, prev = inp[j], inp[j - 1]
            cur_in = _cross(c1, c2, cur) >= -1e-12
            prev_in = _cross(c1, c2, prev) >= -1e-12
            if cur_in:
                if not prev_in:
                    out.append(_line_cross(prev, cur, c1, c2))
                out.append(cur)
            elif prev_in:
                out.append(_line_cross(prev, cur, c1, c2))
    return np.array(out) if out else np.zeros((0, 2))


def _line_cross(p, q, a, b):
    r = (q[0] - p[0], q[1] - p[1])
    s = (b[0] - a[0], b[1] - a[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-15:
        return p
    t = ((a[0] - p[0]) * s[1] - (a[1] - p[1]) * s[0]) / denom
    return (p[0] + t * r[0], p[1] + t * r[1])


def rect_iou(a, b) -> float:
    """IoU of two convex polygons (typically oriented rectangles)."""
    inter = polygon_area(convex_intersection(a, b))
    if inter <= 0.0:
        return 0.0
    union = polygon_area(a) + polygon_area(b) - inter
    return inter / union if union > 0 else 0.0


def rects_overlap(a, b) -> bool:
    """Separating-axis test for two convex polygons; touching is not overlap."""
    for poly in (np.asarray(a, float), np.asarray(b, float)):
        n = len(poly)
        for i in range(n):
            e = poly[(i + 1) % n] - poly[i]
            axis = np.array([-e[1], e[0]])
            pa = np.asarray(a, float) @ axis
            pb = np.asarray(b, float) @ axis
            if pa.max() <= pb.min() + 1e-12 or pb.max() <= pa.min() + 1e-12:
                return False
    return True


def polyline_arclength(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if len(p) == 0:
        return np.zeros(0)
    seg = np.hypot(np.diff(p[:, 0]), np.diff(p[:, 1]))
    return np.concatenate(([0.0], np.cumsum(seg)))


def polygon_edges(corners: Sequence) -> list:
    c = [tuple(map(float, p)) for p in corners]
    return [(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]
