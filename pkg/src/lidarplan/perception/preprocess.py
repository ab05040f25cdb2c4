"""Region-of-interest crop and voxel-grid downsampling."""

from __future__ import annotations

import numpy as np

from ..lidar import PointCloud


def crop_roi(cloud: PointCloud, roi_radius: float) -> PointCloud:
    """Keep points whose bird's-eye distance from the sensor is <= ``roi_radius``."""
    p = cloud.points
    if len(p) == 0:
        return cloud
    keep = p[:, 0] * p[:, 0] + p[:, 1] * p[:, 1] <= roi_radius * roi_radius
    return cloud.with_points(p[keep])


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """Replace the points of every occupied voxel by their centroid.

    Output order follows the voxel key order, which makes the result
    independent of input point order.
    """
    if voxel_size <= 0:
        raise ValueError("voxel_size must be > 0")
    p = cloud.points
    if len(p) == 0:
        return cloud
    keys = np.floor(p / voxel_size).astype(np.int64)
    keys -= keys.min(axis=0)
    span = keys.max(axis=0) + 1
    flat = (keys[:, 0] * span[1] + keys[:, 1]) * span[2] + keys[:, 2]
    uniq, inv = np.unique(flat, return_inverse=True)
    counts = np.bincount(inv, minlength=len(uniq)).astype(float)
    out = np.empty((len(uniq), 3))
    for k in range(3):
        out[:, k] = np.bincount(inv, weights=p[:, k], minlength=len(uniq)) / counts
    return cloud.with_points(out)
