"""Per-vehicle UKF tracks and the frame-to-frame tracker.

Tracks live in an ego-centred, map-aligned frame: the origin follows the
ego's sensor, the axes stay parallel to the map. Motion between frames is
then a pure translation and velocities need no rotation. Confirmed tracks
are exported in the ego frame (x forward, y left).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..geometry import box_corners, wrap_angle
from ..world.config import TrackingConfig
from .association import Association, gnn_associate
from .ego_motion import EgoMotion, compensate_ego_motion, motion_from_poses
from .ukf import (SigmaParams, SigmaPointFailure, V, YAW, YAW_RATE, ctrv_fx,
                  ctrv_process_noise, ukf_predict_raw, ukf_update_raw)

TENTATIVE, CONFIRMED, DEAD = "tentative", "confirmed", "dead"
_SIGMA = SigmaParams()
_ANGLE = (YAW,)


class InsufficientHistory(ValueError):
    pass


@dataclass
class Track:
    id: int
    x: np.ndarray
    P: np.ndarray
    extent: Tuple[float, float]
    hits: int = 1
    misses: int = 0
    status: str = TENTATIVE
    age: int = 1
    # (time, x, y) of measured centres in the current working frame
    history: Deque = field(default_factory=lambda: deque(maxlen=32))
    # 1 for a hit, 0 for a miss, most recent last
    recent: Deque = field(default_factory=lambda: deque(maxlen=32))
    innovation: Optional[np.ndarray] = None
    nis: Optional[float] = None
    fd_velocity: Optional[Tuple[float, float]] = None

    @property
    def center(self) -> np.ndarray:
        return self.x[:2]

    @property
    def speed(self) -> float:
        return float(self.x[V])

    @property
    def yaw(self) -> float:
        return float(self.x[YAW])


@dataclass(frozen=True)
class TrackedObject:
    """Immutable snapshot of a track, in the frame it was exported to."""
    id: int
    center: Tuple[float, float]
    yaw: float
    speed: float
    yaw_rate: float
    extent: Tuple[float, float]
    static: bool
    status: str
    cov_diag: Tuple[float, ...]

    @property
    def length(self) -> float:
        return self.extent[0]

    @property
    def width(self) -> float:
        return self.extent[1]

    def corners(self) -> np.ndarray:
        return box_corners(self.center, self.yaw, self.extent[0], self.extent[1])

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "state": [round(float(v), 6) for v in
                      (self.center[0], self.center[1], self.yaw, self.speed, self.yaw_rate)],
            "cov_diag": [float(f"{v:.6g}") for v in self.cov_diag],
            "extent": [round(float(v), 4) for v in self.extent],
            "static": bool(self.static),
            "status": self.status,
        }


@dataclass(frozen=True)
class VelocityEstimate:
    speed: float
    yaw: float
    static: bool
    variance: float


# --- filter steps ---------------------------------------------------------

def _normalise(track: Track) -> Track:
    """Keep v >= 0 by flipping the heading, and yaw in [-pi, pi)."""
    x = track.x.copy()
    if x[V] < 0:
        x[V] = -x[V]
        x[YAW] += math.pi
    x[YAW] = wrap_angle(float(x[YAW]))
    track.x = x
    return track


def ukf_predict(track: Track, dt: float, config: TrackingConfig = TrackingConfig()) -> Track:
    """CTRV prediction. Raises SigmaPointFailure if the covariance is unusable."""
    Q = ctrv_process_noise(track.x, dt, config.sigma_accel, config.sigma_yaw_accel)
    x, P = ukf_predict_raw(track.x, track.P, ctrv_fx, dt, Q, _SIGMA, _ANGLE)
    out = replace(track, x=x, P=P)
    return _normalise(out)


def disambiguate_yaw(measured: float, reference: float, quarter_turns: bool = True):
    """Candidate of ``measured`` modulo pi/2 (or pi) nearest ``reference``.

    Returns the chosen yaw and whether it is a quarter turn away from the
    measurement (so length and width swap).
    """
    step = 0.5 * math.pi if quarter_turns else math.pi
    k = round(wrap_angle(reference - measured) / step)
    yaw = wrap_angle(measured + k * step)
    return float(yaw), bool(quarter_turns and k % 2)


def _hx_pose(s):
    return s[:3]


def _hx_velocity(s):
    return np.array([s[V] * math.cos(s[YAW]), s[V] * math.sin(s[YAW])])


def ukf_update(track: Track, detection, config: TrackingConfig = TrackingConfig()) -> Track:
    """Fuse a detection (centre, yaw) already expressed in the track's frame."""
    yaw, _ = disambiguate_yaw(float(detection.yaw), track.yaw)
    z = np.array([detection.center[0], detection.center[1], yaw])
    R = np.diag([config.meas_pos_sigma ** 2, config.meas_pos_sigma ** 2,
                 config.meas_yaw_sigma ** 2])
    x, P, y, S = ukf_update_raw(track.x, track.P, z, _hx_pose, R, _SIGMA, _ANGLE, (2,))
    out = replace(track, x=x, P=P, innovation=y,
                  nis=float(y @ np.linalg.solve(S, y)))
    return _normalise(out)


def fuse_velocity(track: Track, vxy, config: TrackingConfig = TrackingConfig()) -> Track:
    R = np.eye(2) * config.fd_velocity_sigma ** 2
    x, P, _, _ = ukf_update_raw(track.x, track.P, np.asarray(vxy, dtype=float),
                                _hx_velocity, R, _SIGMA, _ANGLE)
    return _normalise(replace(track, x=x, P=P))


def new_track(track_id: int, center, yaw: float, extent,
              config: TrackingConfig = TrackingConfig(), time: float = 0.0) -> Track:
    x = np.array([center[0], center[1], wrap_angle(yaw), 0.0, 0.0])
    P = np.diag([0.3 ** 2, 0.3 ** 2, 0.3 ** 2, 4.0 ** 2, 0.3 ** 2])
    t = Track(track_id, x, P, (float(extent[0]), float(extent[1])))
    t.history.append((time, float(center[0]), float(center[1])))
    t.recent.append(1)
    return t


# --- velocity from compensated history -----------------------------------

def finite_difference(history: Sequence[Tuple[float, float, float]], window: int):
    """Average velocity over the last ``window`` samples of (t, x, y)."""
    h = list(history)[-window:]
    if len(h) < 2:
        raise InsufficientHistory("need two positions")
    t0, x0, y0 = h[0]
    t1, x1, y1 = h[-1]
    if t1 - t0 <= 0:
        raise InsufficientHistory("zero time span")
    return (x1 - x0) / (t1 - t0), (y1 - y0) / (t1 - t0)


def estimate_velocity(positions: Sequence, ego_motions: Sequence[EgoMotion],
                      static_speed: float = 0.5) -> VelocityEstimate:
    """Speed and heading of an object from its past positions.

    ``positions[i]`` is expressed in the observation frame of step i and
    ``ego_motions[i]`` carries frame i to frame i + 1. With fewer than two
    positions the object is reported static with a wide variance.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pos) < 2:
        return VelocityEstimate(0.0, 0.0, True, 1e6)
    if len(ego_motions) != len(pos) - 1:
        raise ValueError("need one ego motion per consecutive pair")
    comp = pos.copy()
    t = 0.0
    for i, m in enumerate(ego_motions):
        comp[: i + 1] = compensate_ego_motion(comp[: i + 1], m)
        t += m.dt
    d = comp[-1] - comp[0]
    speed = float(math.hypot(*d) / t)
    yaw = float(math.atan2(d[1], d[0])) if speed > 0 else 0.0
    return VelocityEstimate(speed, yaw, speed < static_speed, 0.0)


# --- lifecycle ------------------------------------------------------------

def _inside(point, track: Track, margin: float = 0.3) -> bool:
    c, s = math.cos(track.yaw), math.sin(track.yaw)
    dx, dy = point[0] - track.x[0], point[1] - track.x[1]
    lx, ly = c * dx + s * dy, -s * dx + c * dy
    return abs(lx) <= 0.5 * track.extent[0] + margin and abs(ly) <= 0.5 * track.extent[1] + margin


def manage_tracks(tracks: List[Track], assoc: Association, detections, next_id: int,
                  config: TrackingConfig = TrackingConfig(), time: float = 0.0,
                  birth_pose=None) -> Tuple[List[Track], int]:
    """Apply hit/miss bookkeeping, births and deaths.

    ``tracks`` are assumed already updated for matched pairs. Returns the
    surviving tracks and the next unused id.
    """
    matched = {ti for ti, _ in assoc.matches}
    out: List[Track] = []
    for i, t in enumerate(tracks):
        if i not in matched:
            t.misses += 1
            t.recent.append(0)
            t.age += 1
        if t.status == TENTATIVE:
            window = list(t.recent)[-config.confirm_window:]
            if sum(window) >= config.confirm_hits:
                t.status = CONFIRMED
            elif t.age >= config.confirm_window or t.misses >= config.max_misses:
                t.status = DEAD
        elif t.status == CONFIRMED and t.misses >= config.max_misses:
            t.status = DEAD
        if t.status != DEAD:
            out.append(t)

    confirmed = [t for t in out if t.status == CONFIRMED]
    for j in assoc.unmatched_detections:
        d = detections[j]
        if any(_inside(d.center, t) for t in confirmed):
            continue
        center, yaw, extent = (birth_pose(d) if birth_pose else (d.center, d.yaw, d.extent))
        out.append(new_track(next_id, center, yaw, extent, config, time))
        next_id += 1
    return out, next_id


# --- tracker --------------------------------------------------------------

@dataclass(frozen=True)
class _Det:
    center: Tuple[float, float]
    yaw: float
    extent: Tuple[float, float]


class Tracker:
    """Single-writer multi-object tracker fed once per perception frame."""

    def __init__(self, config: TrackingConfig = TrackingConfig()):
        self.config = config
        self.tracks: List[Track] = []
        self._next_id = 1
        self._pose = None
        self._time = 0.0
        self.dropped = 0

    # frame helpers
    @staticmethod
    def _to_aligned(det, ego_yaw: float) -> _Det:
        c, s = math.cos(ego_yaw), math.sin(ego_yaw)
        x, y = det.center
        return _Det((c * x - s * y, s * x + c * y), wrap_angle(det.yaw + ego_yaw),
                    (float(det.extent[0]), float(det.extent[1])))

    def _birth_pose(self, d: _Det):
        """Centre, heading and extent guess for a new track: along the long side, pointing the
        way the ego faces. A short, thin detection is one visible face seen
        end-on, so the heading is perpendicular to it."""
        yaw, (length, width) = d.yaw, d.extent
        if width < 0.8 and length < 3.0:
            yaw, length, width = yaw + 0.5 * math.pi, width, length
        if abs(wrap_angle(yaw - self._ego_yaw)) > 0.5 * math.pi:
            yaw += math.pi
        cfg = self.config
        yaw = wrap_angle(yaw)
        full = (max(length, cfg.prior_length), max(width, cfg.prior_width))
        center = self._aligned_center(full, d.center, yaw, (length, width))
        return center, yaw, full

    @staticmethod
    def _aligned_center(full_extent, center, yaw: float, extent) -> Tuple[float, float]:
        """Shift a partial-view centre so the face nearest the sensor stays put."""
        c = np.asarray(center, dtype=float)
        for axis, (full, seen) in enumerate(zip(full_extent, extent)):
            if full <= seen:
                continue
            ang = yaw + axis * 0.5 * math.pi
            u = np.array([math.cos(ang), math.sin(ang)])
            side = 1.0 if float(u @ c) >= 0 else -1.0
            c = c + side * 0.5 * (full - seen) * u
        return float(c[0]), float(c[1])

    def _update_extent(self, t: Track, extent) -> Tuple[float, float]:
        a = self.config.extent_alpha
        out = []
        for cur, obs, prior in zip(t.extent, extent,
                                   (self.config.prior_length, self.config.prior_width)):
            if obs >= cur:
                out.append(float(obs))
            else:
                out.append((1 - a) * cur + a * max(obs, prior))
        return out[0], out[1]

    def _correct(self, t: Track, d: _Det) -> Track:
        cfg = self.config
        yaw, swapped = disambiguate_yaw(d.yaw, t.yaw)
        extent = (d.extent[1], d.extent[0]) if swapped else d.extent
        center = self._aligned_center(t.extent, d.center, yaw, extent)
        t = ukf_update(t, _Det(center, yaw, extent), cfg)
        t.extent = self._update_extent(t, extent)
        t.history.append((self._time, center[0], center[1]))
        t.hits += 1
        t.misses = 0
        t.age += 1
        t.recent.append(1)
        was_tentative = t.status == TENTATIVE
        if len(t.history) >= 3:
            try:
                vx, vy = finite_difference(t.history, cfg.fd_window)
            except InsufficientHistory:
                return t
            t.fd_velocity = (vx, vy)
            fd_speed = math.hypot(vx, vy)
            window = list(t.recent)[-cfg.confirm_window:]
            confirming = was_tentative and sum(window) >= cfg.confirm_hits
            if fd_speed > 2.0 and (confirming or abs(wrap_angle(
                    math.atan2(vy, vx) - t.yaw)) > math.radians(60)):
                x = t.x.copy()
                x[YAW] = math.atan2(vy, vx)
                x[V] = fd_speed
                P = t.P.copy()
                P[YAW, :] = P[:, YAW] = 0.0
                P[YAW, YAW] = 0.1 ** 2
                P[V, :] = P[:, V] = 0.0
                P[V, V] = 1.0
                t.x, t.P = x, P
            t = fuse_velocity(t, (vx, vy), cfg)
        return t

    def step(self, detections, ego_pose: Tuple[float, float, float], time: float) -> List[TrackedObject]:
        """Advance one frame with ego-frame detections and the ego's map pose."""
        cfg = self.config
        px, py, pyaw = ego_pose
        self._ego_yaw = pyaw
        dt = time - self._time if self._pose is not None else 0.0
        if self._pose is not None and dt > 0:
            motion = motion_from_poses(self._pose[:2], self._pose[2], (px, py), pyaw, dt)
            for t in self.tracks:
                t.x = t.x.copy()
                t.x[:2] = compensate_ego_motion(t.x[:2], motion)[0]
                if t.history:
                    h = np.array(t.history)
                    h[:, 1:] = compensate_ego_motion(h[:, 1:], motion)
                    t.history = deque(map(tuple, h), maxlen=t.history.maxlen)
        self._pose = (px, py, pyaw)
        self._time = time

        alive = []
        for t in self.tracks:
            try:
                alive.append(ukf_predict(t, dt, cfg) if dt > 0 else t)
            except SigmaPointFailure:
                self.dropped += 1
        self.tracks = alive

        dets = [self._to_aligned(d, pyaw) for d in detections]
        assoc = gnn_associate(self.tracks, dets, cfg.gate)
        updated = list(self.tracks)
        for ti, di in assoc.matches:
            try:
                updated[ti] = self._correct(updated[ti], dets[di])
            except SigmaPointFailure:
                updated[ti].status = DEAD
                self.dropped += 1
        self.tracks, self._next_id = manage_tracks(
            updated, assoc, dets, self._next_id, cfg, time, self._birth_pose)
        return self.confirmed(ego_frame=True)

    def confirmed(self, ego_frame: bool = True) -> List[TrackedObject]:
        out = []
        yaw0 = self._pose[2] if (ego_frame and self._pose) else 0.0
        c, s = math.cos(yaw0), math.sin(yaw0)
        for t in self.tracks:
            if t.status != CONFIRMED:
                continue
            x, y = float(t.x[0]), float(t.x[1])
            ex, ey = c * x + s * y, -s * x + c * y
            out.append(TrackedObject(
                t.id, (ex, ey), float(wrap_angle(t.yaw - yaw0)), t.speed,
                float(t.x[YAW_RATE]), t.extent, t.speed < self.config.static_speed,
                t.status, tuple(float(v) for v in np.diag(t.P))))
        out.sort(key=lambda o: o.id)
        return out
