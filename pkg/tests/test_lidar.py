import math

import numpy as np
import pytest

from lidarplan.lidar import dump_cloud, load_cloud, ray_directions, scan
from lidarplan.world import LidarConfig

CLEAN = LidarConfig(range_noise_sigma=0.0, dropout_prob=0.0)


def test_empty_world_hits_ground_in_closed_form():
    cloud = scan([], (0, 0, 0), CLEAN, np.random.default_rng(0))
    pts = cloud.points
    # every point sits on z = -mount_height in the sensor frame
    assert np.allclose(pts[:, 2], -CLEAN.mount_height, atol=1e-9)
    r = np.linalg.norm(pts, axis=1)
    elev = np.arcsin(pts[:, 2] / r)
    assert np.allclose(r, CLEAN.mount_height / np.sin(np.abs(elev)), atol=1e-9)
    assert np.all(elev < 0)


def test_box_ahead_is_seen_on_near_face():
    box = ((10.0, 0.0), 0.0, (4.0, 2.0, 2.0), 0.0)
    pts = scan([box], (0, 0, 0), CLEAN, np.random.default_rng(0)).points
    hits = pts[(pts[:, 2] > -CLEAN.mount_height + 1e-6)]
    assert len(hits) > 0
    ahead = hits[np.abs(hits[:, 1]) < 0.05]
    assert np.allclose(ahead[:, 0], 8.0, atol=1e-9)


def _dist_to_box_surface(p, center, L, W, z0, z1):
    local = np.abs(p - np.array([center[0], center[1], 0.5 * (z0 + z1)]))
    half = np.array([L / 2, W / 2, (z1 - z0) / 2])
    # points are on the surface when inside-or-on and touching one face
    return np.min(np.abs(local - half)) if np.all(local <= half + 1e-9) else np.inf


def test_noise_free_points_lie_on_surfaces():
    box = ((8.0, 3.0), 0.0, (4.0, 2.0, 1.5), 0.0)
    pts = scan([box], (0, 0, 0), CLEAN, np.random.default_rng(0)).points
    h = CLEAN.mount_height
    for p in pts:
        ground = abs(p[2] + h)
        surf = _dist_to_box_surface(p, (8.0, 3.0), 4.0, 2.0, -h, -h + 1.5)
        assert min(ground, surf) < 1e-6


def test_same_seed_same_cloud():
    cfg = LidarConfig()
    box = [((10.0, 0.0), 0.3, (4.5, 1.9, 1.5), 0.0)]
    a = scan(box, (1, 2, 0.4), cfg, np.random.default_rng(7)).points
    b = scan(box, (1, 2, 0.4), cfg, np.random.default_rng(7)).points
    assert np.array_equal(a, b)


def test_range_noise_statistics():
    cfg = LidarConfig(range_noise_sigma=0.02, dropout_prob=0.0)
    wall = ((10.0, 0.0), 0.0, (0.2, 200.0, 30.0), 0.0)
    clean = scan([wall], (0, 0, 0), LidarConfig(range_noise_sigma=0.0, dropout_prob=0.0),
                 np.random.default_rng(1)).points
    errs = []
    for seed in range(20):
        noisy = scan([wall], (0, 0, 0), cfg, np.random.default_rng(seed)).points
        errs.append(np.linalg.norm(noisy, axis=1) - np.linalg.norm(clean, axis=1))
    errs = np.concatenate(errs)
    assert len(errs) >= 1e5
    assert abs(errs.std() - 0.02) / 0.02 < 0.05


def test_dropout_rate():
    cfg = LidarConfig(range_noise_sigma=0.0, dropout_prob=0.05)
    n_full = len(scan([], (0, 0, 0), CLEAN, np.random.default_rng(0)))
    n = len(scan([], (0, 0, 0), cfg, np.random.default_rng(0)))
    assert n / n_full == pytest.approx(0.95, abs=0.01)


def test_coarser_resolution_never_adds_points():
    box = [((10.0, 0.0), 0.3, (4.5, 1.9, 1.5), 0.0)]
    counts = [len(scan(box, (0, 0, 0), LidarConfig(horizontal_resolution=r, dropout_prob=0.0),
                       np.random.default_rng(0))) for r in (0.2, 0.4, 0.8, 1.6)]
    assert counts == sorted(counts, reverse=True)


def test_only_downward_rays_in_range_return():
    dirs = ray_directions(CLEAN)
    down = dirs[..., 2] < 0
    assert not down.all()
    with np.errstate(divide="ignore"):
        ground_range = np.where(down, CLEAN.mount_height / -dirs[..., 2], np.inf)
    pts = scan([], (0, 0, 0), CLEAN, np.random.default_rng(0)).points
    assert len(pts) == int((ground_range <= CLEAN.max_range).sum())


def test_dump_and_load_round_trip(tmp_path):
    cloud = scan([((10.0, 0.0), 0.0, (4.0, 2.0, 2.0), 0.0)], (0, 0, 0), LidarConfig(),
                 np.random.default_rng(3), timestamp=1.5, frame_id=30)
    dump_cloud(tmp_path / "000030", cloud, (1.0, 2.0, 0.5), LidarConfig())
    back, meta = load_cloud(tmp_path / "000030")
    assert meta["frame_id"] == 30 and meta["pose"] == [1.0, 2.0, 0.5]
    assert np.allclose(back.points, cloud.points, atol=1e-5)
    assert (tmp_path / "000030.bin").stat().st_size == 12 * len(cloud)


def test_pose_rotation_moves_box_into_view_frame():
    box = [((0.0, 10.0), 0.0, (2.0, 2.0, 2.0), 0.0)]
    pts = scan(box, (0, 0, math.pi / 2), CLEAN, np.random.default_rng(0)).points
    above = pts[pts[:, 2] > -CLEAN.mount_height + 1e-6]
    assert np.allclose(above[:, 0].min(), 9.0, atol=1e-9)
