"""Synthetic spinning LiDAR.

Rays are cast from the sensor origin against oriented vehicle and clutter
boxes (slab method) and a single ground plane. Range noise is applied along
the ray. Points are returned in the sensor frame: x forward, y left, z up,
origin at the sensor.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np

from .world.config import LidarConfig


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    timestamp: float = 0.0
    frame_id: int = 0

    def __len__(self) -> int:
        return len(self.points)

    @property
    def intensity(self) -> np.ndarray:
        return np.ones(len(self.points))

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return PointCloud(points, self.timestamp, self.frame_id)


@lru_cache(maxsize=8)
def _ray_grid(channels: int, fov: Tuple[float, float], res_deg: float):
    elev = np.radians(np.linspace(fov[0], fov[1], channels))
    n_az = int(round(360.0 / res_deg))
    az = -np.pi + np.arange(n_az) * (2.0 * np.pi / n_az)
    ce, se = np.cos(elev)[:, None], np.sin(elev)[:, None]
    dx = ce * np.cos(az)[None, :]
    dy = ce * np.sin(az)[None, :]
    dz = np.broadcast_to(se, dx.shape).copy()
    for a in (dx, dy, dz):
        a.setflags(write=False)
    return dx, dy, dz, az


def ray_directions(config: LidarConfig) -> np.ndarray:
    dx, dy, dz, _ = _ray_grid(config.channels, tuple(config.vertical_fov),
                              config.horizontal_resolution)
    return np.stack([dx, dy, dz], axis=-1)


def _ground_range(dx, dy, dz, slope_local, height):
    a, b = slope_local
    denom = dz - a * dx - b * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom < -1e-12, -height / denom, np.inf)
    return t


def _azimuth_columns(corners_s: np.ndarray, n_az: int):
    """Column indices covering a box footprint seen from the origin, or None
    when the origin lies inside the footprint (test every column)."""
    ang = np.arctan2(corners_s[:, 1], corners_s[:, 0])
    ref = ang[0]
    rel = (ang - ref + np.pi) % (2 * np.pi) - np.pi
    lo, hi = rel.min(), rel.max()
    if hi - lo >= np.pi:
        return None
    step = 2.0 * np.pi / n_az
    j_lo = int(math.floor((ref + lo + np.pi) / step)) - 1
    j_hi = int(math.ceil((ref + hi + np.pi) / step)) + 1
    return np.arange(j_lo, j_hi + 1) % n_az


def _box_ranges(dx, dy, dz, center, yaw, half_l, half_w, z0, z1):
    """Entry distance along each ray into an oriented box (inf if missed)."""
    c, s = math.cos(yaw), math.sin(yaw)
    ox = -(c * center[0] + s * center[1])
    oy = -(-s * center[0] + c * center[1])
    ddx = c * dx + s * dy
    ddy = -s * dx + c * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_x = 1.0 / ddx
        inv_y = 1.0 / ddy
        inv_z = 1.0 / dz
        tx1, tx2 = (-half_l - ox) * inv_x, (half_l - ox) * inv_x
        ty1, ty2 = (-half_w - oy) * inv_y, (half_w - oy) * inv_y
        tz1, tz2 = z0 * inv_z, z1 * inv_z
    tmin = np.maximum(np.maximum(np.minimum(tx1, tx2), np.minimum(ty1, ty2)),
                      np.minimum(tz1, tz2))
    tmax = np.minimum(np.minimum(np.maximum(tx1, tx2), np.maximum(ty1, ty2)),
                      np.maximum(tz1, tz2))
    hit = (tmax >= tmin) & (tmin > 0.0)
    return np.where(hit, tmin, np.inf)


def scan(boxes: Sequence, ego_pose: Tuple[float, float, float], config: LidarConfig,
         rng: np.random.Generator, ground_slope=(0.0, 0.0), timestamp: float = 0.0,
         frame_id: int = 0) -> PointCloud:
    """Cast every (channel, azimuth) ray and return the noisy hit points.

    ``boxes`` holds ``(center_xy, yaw, (L, W, H), z_base)`` tuples in the map
    frame (extra trailing items are ignored). ``ego_pose`` is the map-frame
    ``(x, y, yaw)`` of the sensor's ground footprint. Range noise is drawn
    from N(0, sigma^2) truncated at 6 sigma.
    """
    dx, dy, dz, az = _ray_grid(config.channels, tuple(config.vertical_fov),
                               config.horizontal_resolution)
    n_az = len(az)
    px, py, pyaw = ego_pose
    c, s = math.cos(pyaw), math.sin(pyaw)
    gx, gy = ground_slope
    ground_at_ego = gx * px + gy * py
    sensor_z = ground_at_ego + config.mount_height
    slope_local = (gx * c + gy * s, -gx * s + gy * c)

    rng_t = _ground_range(dx, dy, dz, slope_local, config.mount_height)

    for box in boxes:
        (bx, by), byaw, (L, W, H), zb = box[0], box[1], box[2], box[3]
        rx, ry = bx - px, by - py
        cx, cy = c * rx + s * ry, -s * rx + c * ry
        reach = math.hypot(cx, cy) - 0.5 * math.hypot(L, W)
        if reach > config.max_range:
            continue
        yaw_s = byaw - pyaw
        z0 = gx * bx + gy * by + zb - sensor_z
        ch, sh = math.cos(yaw_s), math.sin(yaw_s)
        local = np.array([[0.5 * L, 0.5 * W], [-0.5 * L, 0.5 * W],
                          [-0.5 * L, -0.5 * W], [0.5 * L, -0.5 * W]])
        corners = local @ np.array([[ch, sh], [-sh, ch]]) + (cx, cy)
        cols = _azimuth_columns(corners, n_az)
        if cols is None:
            r = _box_ranges(dx, dy, dz, (cx, cy), yaw_s, 0.5 * L, 0.5 * W, z0, z0 + H)
            np.minimum(rng_t, r, out=rng_t)
        else:
            r = _box_ranges(dx[:, cols], dy[:, cols], dz[:, cols], (cx, cy), yaw_s,
                            0.5 * L, 0.5 * W, z0, z0 + H)
            rng_t[:, cols] = np.minimum(rng_t[:, cols], r)

    sigma = config.range_noise_sigma
    noise = rng.standard_normal(rng_t.shape)
    keep_draw = rng.random(rng_t.shape) >= config.dropout_prob
    valid = (rng_t <= config.max_range) & keep_draw
    r = rng_t[valid]
    if sigma > 0:
        r = r + sigma * np.clip(noise[valid], -6.0, 6.0)
    pts = np.column_stack((dx[valid] * r, dy[valid] * r, dz[valid] * r))
    return PointCloud(pts, timestamp, frame_id)


def config_hash(config: LidarConfig) -> str:
    blob = json.dumps(asdict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def dump_cloud(stem, cloud: PointCloud, pose, config: LidarConfig) -> Tuple[Path, Path]:
    """Write ``<stem>.bin`` (little-endian float32 x,y,z) and ``<stem>.json``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    bin_path = stem.with_suffix(".bin")
    json_path = stem.with_suffix(".json")
    cloud.points.astype("<f4").tofile(bin_path)
    meta = {
        "frame_id": int(cloud.frame_id),
        "timestamp": float(cloud.timestamp),
        "pose": [float(v) for v in pose],
        "n_points": int(len(cloud)),
        "config_hash": config_hash(config),
    }
    json_path.write_text(json.dumps(meta, sort_keys=True) + "\n")
    return bin_path, json_path


def load_cloud(stem) -> Tuple[PointCloud, dict]:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    pts = np.fromfile(stem.with_suffix(".bin"), dtype="<f4").reshape(-1, 3).astype(float)
    return PointCloud(pts, meta.get("timestamp", 0.0), meta["frame_id"]), meta
