import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lidarplan.geometry import box_corners
from lidarplan.lidar import PointCloud, scan
from lidarplan.perception import (DegenerateCloud, DegenerateCluster, crop_roi, dbscan_cluster,
                                  detect_frame, l_shape_fit, ransac_ground, rule_checks,
                                  rule_classify, voxel_downsample)
from lidarplan.perception.lshape import closeness_scores, rectangle_at
from lidarplan.world import LidarConfig, PerceptionConfig
from lidarplan.world.config import ClassifierConfig, RansacConfig
from oracles import reference_dbscan


def _cloud(pts):
    return PointCloud(np.asarray(pts, dtype=float).reshape(-1, 3))


# --- crop / voxel -----------------------------------------------------------

def test_crop_threshold():
    c = _cloud([[5, 0, 0], [0, 19.9, 0], [20.1, 0, 0]])
    assert np.array_equal(crop_roi(c, 20.0).points, c.points[:2])


def test_crop_empty_and_identity():
    assert len(crop_roi(_cloud([]), 20.0)) == 0
    c = _cloud([[1, 2, 3], [4, 5, 6]])
    assert np.array_equal(crop_roi(c, 20.0).points, c.points)


def test_voxel_cube_to_centroid():
    cube = np.array([[x, y, z] for x in (0, 0.01) for y in (0, 0.01) for z in (0, 0.01)]) + 0.3
    out = voxel_downsample(_cloud(cube), 1.0).points
    assert out.shape == (1, 3)
    assert np.allclose(out[0], cube.mean(axis=0))


def test_voxel_distinct_points_unchanged():
    pts = np.array([[0.5, 0.5, 0.5], [1.5, 0.5, 0.5], [0.5, 3.5, -2.5]])
    out = voxel_downsample(_cloud(pts), 1.0).points
    assert sorted(map(tuple, out)) == sorted(map(tuple, pts))
    assert len(voxel_downsample(_cloud([]), 1.0)) == 0


def test_voxel_order_independent():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-5, 5, (500, 3))
    a = voxel_downsample(_cloud(pts), 0.5).points
    b = voxel_downsample(_cloud(pts[rng.permutation(500)]), 0.5).points
    assert np.allclose(a, b)


# --- ground -----------------------------------------------------------------

def _plane_and_box(noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    g = np.column_stack((rng.uniform(-15, 15, (3000, 2)), np.zeros(3000)))
    g[:, 2] += noise * rng.standard_normal(3000)
    box = np.column_stack((rng.uniform(4, 8, 300), rng.uniform(-1, 1, 300),
                           rng.uniform(0.4, 1.5, 300)))
    return g, box


def test_ransac_exact_plane():
    g, box = _plane_and_box()
    ground, rest, plane = ransac_ground(_cloud(np.vstack((g, box))), RansacConfig(),
                                        np.random.default_rng(1))
    assert np.allclose(plane, (0, 0, 1, 0), atol=1e-6)
    assert len(rest) == len(box)


def test_ransac_noisy_plane_inliers():
    g, box = _plane_and_box(noise=0.02)
    ground, _, _ = ransac_ground(_cloud(np.vstack((g, box))), RansacConfig(distance_threshold=0.1),
                                 np.random.default_rng(1))
    assert len(ground) >= 0.99 * len(g)


def test_ransac_degenerate():
    with pytest.raises(DegenerateCloud):
        ransac_ground(_cloud([[0, 0, 0], [1, 0, 0]]), RansacConfig(), np.random.default_rng(0))


# --- DBSCAN -----------------------------------------------------------------

def _labels(clusters, n):
    lab = np.full(n, -1)
    for k, idx in enumerate(clusters):
        lab[idx] = k
    return lab


def test_two_blobs():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 0.1, (50, 3))
    b = rng.normal(0, 0.1, (50, 3)) + [10, 0, 0]
    clusters, noise = dbscan_cluster(np.vstack((a, b)), 0.5, 5)
    assert len(clusters) == 2 and len(noise) == 0


def test_sparse_scatter_is_noise():
    pts = np.array([[i * 2.0, 0, 0] for i in range(20)])
    clusters, noise = dbscan_cluster(pts, 0.5, 2)
    assert clusters == [] and len(noise) == 20
    clusters, noise = dbscan_cluster(np.zeros((0, 3)), 0.5, 2)
    assert clusters == [] and len(noise) == 0


def test_dbscan_matches_reference():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(5, 120))
        pts = rng.uniform(0, 4, (n, 3)) * [1, 1, 0.2]
        eps, mp = float(rng.uniform(0.2, 0.8)), int(rng.integers(2, 6))
        clusters, _ = dbscan_cluster(pts, eps, mp)
        assert np.array_equal(_labels(clusters, n), reference_dbscan(pts, eps, mp))


# --- L-shape ---------------------------------------------------------------

def _l_points(center, yaw, length, width, n=60, seed=0):
    """Points on the two faces of a box visible from the origin."""
    rng = np.random.default_rng(seed)
    c = box_corners(center, yaw, length, width)
    near = int(np.argmin(np.linalg.norm(c, axis=1)))
    a, b, p = c[(near - 1) % 4], c[(near + 1) % 4], c[near]
    t = rng.uniform(0, 1, (n, 1))
    pts = np.vstack((p + t * (a - p), p + t * (b - p)))
    return np.column_stack((pts, np.zeros(len(pts))))


def exhaustive_fit(points, step_deg=0.1):
    bev = points[:, :2]
    angles = np.radians(np.arange(0.0, 90.0, step_deg))
    return rectangle_at(bev, float(angles[np.argmin(closeness_scores(bev, angles))]))


def _yaw_diff_deg(a, b):
    d = (a - b + math.pi / 4) % (math.pi / 2) - math.pi / 4
    return abs(math.degrees(d))


def test_axis_aligned_fit():
    fit = l_shape_fit(_l_points((10, 3), 0.0, 4.5, 1.9))
    assert _yaw_diff_deg(fit.yaw, 0.0) <= 1.0
    assert fit.extent == pytest.approx((4.5, 1.9), abs=0.3)


@pytest.mark.parametrize("yaw_deg", [30.0, 12.5, 57.0, -20.0])
def test_rotated_fit_against_exhaustive_search(yaw_deg):
    yaw = math.radians(yaw_deg)
    pts = _l_points((9, -4), yaw, 4.5, 1.9, seed=int(yaw_deg * 10) % 97)
    fit = l_shape_fit(pts)
    ref = exhaustive_fit(pts)
    assert _yaw_diff_deg(fit.yaw, yaw) <= 1.0
    assert _yaw_diff_deg(fit.yaw, ref.yaw) <= 1.0
    assert sorted(fit.extent) == pytest.approx(sorted(ref.extent), abs=2 * 0.15)


@given(st.floats(0, 2 * math.pi))
def test_fit_rotation_equivariance(alpha):
    pts = _l_points((10, 2), 0.2, 4.5, 1.9, seed=1)
    c, s = math.cos(alpha), math.sin(alpha)
    rot = pts.copy()
    rot[:, 0], rot[:, 1] = c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1]
    a, b = l_shape_fit(pts), l_shape_fit(rot)
    assert _yaw_diff_deg(b.yaw, a.yaw + alpha) <= 1.0 + 1e-9
    assert sorted(b.extent) == pytest.approx(sorted(a.extent), abs=0.3)


def test_two_points_degenerate():
    with pytest.raises(DegenerateCluster):
        l_shape_fit(np.array([[0, 0, 0], [1, 1, 0]], float))


# --- classifier ----------------------------------------------------------

def test_car_accepted_bus_rejected():
    cfg = ClassifierConfig()
    assert rule_classify((4.5, 1.9), 300, cfg)
    checks = rule_checks((12.0, 3.0), 300, cfg)
    assert not checks["length"] and not rule_classify((12.0, 3.0), 300, cfg)
    assert not rule_classify((4.5, 1.9), 3, cfg)


@pytest.mark.parametrize("extent,n,rule", [
    ((4.5, 1.9), 3, "n_points"),
    ((4.5, 3.5), 300, "width"),
    ((0.5, 0.4), 300, "length"),
    ((6.4, 2.95), 300, "area"),
])
def test_single_rule_violations(extent, n, rule):
    cfg = ClassifierConfig()
    checks = rule_checks(extent, n, cfg)
    assert not checks[rule]
    assert rule_classify(extent, n, cfg) == all(checks.values())
    assert not rule_classify(extent, n, cfg)


def test_ratio_rule_alone():
    cfg = ClassifierConfig(width_length_ratio_range=(0.2, 0.6))
    checks = rule_checks((2.0, 1.9), 300, cfg)
    assert [k for k, v in checks.items() if not v] == ["width_length_ratio"]
    assert not rule_classify((2.0, 1.9), 300, cfg)


# --- full frame ------------------------------------------------------------

# both cars show two faces to the sensor, so the fitted box covers the whole car
CARS = [((8.0, 5.0), 0.0, (4.5, 1.9, 1.5), 0.0), ((-6.0, 6.0), 0.0, (4.5, 1.9, 1.5), 0.0)]


def _frame(boxes, seed=0):
    cfg = LidarConfig(range_noise_sigma=0.0, dropout_prob=0.0)
    return scan(boxes, (0, 0, 0), cfg, np.random.default_rng(seed))


def test_two_noiseless_cars_detected():
    res = detect_frame(_frame(CARS), PerceptionConfig(), np.random.default_rng(0))
    assert len(res.detections) == 2
    for (c, _, _, _) in CARS:
        assert min(math.dist(c, det.center) for det in res.detections) < 0.3


def test_cars_beyond_roi_ignored():
    far = [((30.0, 0.0), 0.0, (4.5, 1.9, 1.5), 0.0)]
    assert detect_frame(_frame(far), PerceptionConfig(), np.random.default_rng(0)).detections == []


def test_degenerate_frame_is_skipped():
    res = detect_frame(_cloud([[1, 0, 0], [2, 0, 0]]), PerceptionConfig(),
                       np.random.default_rng(0))
    assert res.skipped and res.detections == []


def test_stage_counts_monotone_and_deterministic():
    cloud = scan(CARS, (0, 0, 0), LidarConfig(), np.random.default_rng(4))
    a = detect_frame(cloud, PerceptionConfig(), np.random.default_rng(9))
    b = detect_frame(cloud, PerceptionConfig(), np.random.default_rng(9))
    c = a.stage_counts
    assert c["input"] >= c["crop"] >= c["voxel"] >= c["ground"]
    assert [d.to_record() for d in a.detections] == [d.to_record() for d in b.detections]
    assert set(a.durations_us) == {"crop", "voxel", "ground", "cluster", "fit"}
