"""RANSAC ground-plane segmentation."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from ..lidar import PointCloud
from ..world.config import RansacConfig


class DegenerateCloud(ValueError):
    """Too few points, or no plane reaches the minimum inlier fraction."""


_SCORE_SAMPLE = 4000
_BATCH = 25


def _refit(points: np.ndarray) -> np.ndarray:
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    n = vt[-1]
    return np.append(n, -n @ centroid)


def _normalize(plane: np.ndarray) -> np.ndarray:
    plane = plane / np.linalg.norm(plane[:3])
    return -plane if plane[2] < 0 else plane


def ransac_ground(cloud: PointCloud, params: RansacConfig, rng: np.random.Generator
                  ) -> Tuple[PointCloud, PointCloud, Tuple[float, float, float, float]]:
    """Split ``cloud`` into ground inliers and the rest.

    Hypotheses are three-point planes scored on a fixed random subsample; the
    winner is refit to its inliers by least squares. The returned plane
    ``(a, b, c, d)`` satisfies ``a x + b y + c z + d = 0`` with a unit normal
    and ``c > 0``.
    """
    pts = cloud.points
    n = len(pts)
    if n < 3:
        raise DegenerateCloud(f"need at least 3 points, got {n}")
    thr = params.distance_threshold

    if n > _SCORE_SAMPLE:
        sample = pts[rng.choice(n, _SCORE_SAMPLE, replace=False)]
    else:
        sample = pts
    hom = np.column_stack((sample, np.ones(len(sample))))

    best_plane, best_count = None, -1
    remaining = params.max_iterations
    while remaining > 0:
        k = min(_BATCH, remaining)
        remaining -= k
        idx = rng.integers(0, n, size=(k, 3))
        a, b, c = pts[idx[:, 0]], pts[idx[:, 1]], pts[idx[:, 2]]
        normal = np.cross(b - a, c - a)
        norm = np.linalg.norm(normal, axis=1)
        ok = norm > 1e-9
        if not ok.any():
            continue
        normal = normal[ok] / norm[ok, None]
        d = -np.einsum("ij,ij->i", normal, a[ok])
        planes = np.column_stack((normal, d))
        counts = (np.abs(hom @ planes.T) <= thr).sum(axis=0)
        j = int(np.argmax(counts))
        if counts[j] > best_count:
            best_count, best_plane = int(counts[j]), planes[j]

    if best_plane is None:
        raise DegenerateCloud("all sampled point triples were collinear")

    dist = np.abs(pts @ best_plane[:3] + best_plane[3])
    inliers = dist <= thr
    if inliers.sum() >= 3:
        plane = _refit(pts[inliers])
        dist = np.abs(pts @ plane[:3] + plane[3])
        refit_inliers = dist <= thr
        if refit_inliers.sum() >= inliers.sum():
            best_plane, inliers = plane, refit_inliers
    best_plane = _normalize(best_plane)

    if inliers.sum() < params.min_inlier_fraction * n:
        raise DegenerateCloud(
            f"best plane has {int(inliers.sum())}/{n} inliers, below "
            f"min_inlier_fraction={params.min_inlier_fraction}")
    return (cloud.with_points(pts[inliers]), cloud.with_points(pts[~inliers]),
            tuple(float(v) for v in best_plane))
