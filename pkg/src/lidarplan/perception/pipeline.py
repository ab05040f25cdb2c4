"""Per-frame detection: crop, voxel, ground removal, clustering, box fit, rules."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ..lidar import PointCloud
from ..world.config import PerceptionConfig
from .classify import rule_classify
from .cluster import dbscan_cluster
from .ground import DegenerateCloud, ransac_ground
from .lshape import DegenerateCluster, l_shape_fit
from .preprocess import crop_roi, voxel_downsample

STAGES = ("crop", "voxel", "ground", "cluster", "fit")


@dataclass(frozen=True)
class DetectedVehicle:
    center: Tuple[float, float]
    yaw: float
    extent: Tuple[float, float]
    corners: np.ndarray
    n_points: int
    frame_id: int = 0

    def to_record(self) -> dict:
        return {
            "center": [round(float(v), 6) for v in self.center],
            "yaw": round(float(self.yaw), 6),
            "extent": [round(float(v), 6) for v in self.extent],
            "n_points": int(self.n_points),
        }


@dataclass
class FrameDetections:
    frame_id: int
    detections: List[DetectedVehicle]
    skipped: bool = False
    durations_us: Dict[str, float] = field(default_factory=dict)
    stage_counts: Dict[str, int] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "skipped": self.skipped,
            "detections": [d.to_record() for d in self.detections],
            "stage_counts": self.stage_counts,
        }


def detect_frame(cloud: PointCloud, config: PerceptionConfig,
                 rng: np.random.Generator) -> FrameDetections:
    """Run the detection chain on one cloud (sensor frame, sensor at origin)."""
    dur: Dict[str, float] = {}
    counts = {"input": len(cloud)}
    t0 = time.perf_counter()
    roi = crop_roi(cloud, config.roi_radius)
    t1 = time.perf_counter()
    dur["crop"] = (t1 - t0) * 1e6
    counts["crop"] = len(roi)

    down = voxel_downsample(roi, config.voxel_size)
    t2 = time.perf_counter()
    dur["voxel"] = (t2 - t1) * 1e6
    counts["voxel"] = len(down)

    try:
        _, nonground, _ = ransac_ground(down, config.ransac, rng)
    except DegenerateCloud:
        dur["ground"] = (time.perf_counter() - t2) * 1e6
        dur["cluster"] = dur["fit"] = 0.0
        return FrameDetections(cloud.frame_id, [], True, dur, counts)
    t3 = time.perf_counter()
    dur["ground"] = (t3 - t2) * 1e6
    counts["ground"] = len(nonground)

    pts = nonground.points
    clusters, _ = dbscan_cluster(pts, config.dbscan.epsilon, config.dbscan.min_points)
    t4 = time.perf_counter()
    dur["cluster"] = (t4 - t3) * 1e6
    counts["clusters"] = len(clusters)

    dets: List[DetectedVehicle] = []
    cc = config.classifier
    for idx in clusters:
        if not cc.min_points <= len(idx) <= cc.max_points:
            continue
        try:
            fit = l_shape_fit(pts[idx], config.lshape_step_deg)
        except DegenerateCluster:
            continue
        if rule_classify(fit.extent, len(idx), cc):
            dets.append(DetectedVehicle(fit.center, fit.yaw, fit.extent, fit.corners,
                                        len(idx), cloud.frame_id))
    dur["fit"] = (time.perf_counter() - t4) * 1e6
    return FrameDetections(cloud.frame_id, dets, False, dur, counts)
