from .classify import rule_checks, rule_classify
from .cluster import dbscan_cluster
from .ground import DegenerateCloud, ransac_ground
from .lshape import DegenerateCluster, LShapeFit, l_shape_fit
from .pipeline import STAGES, DetectedVehicle, FrameDetections, detect_frame
from .preprocess import crop_roi, voxel_downsample

__all__ = [
    "rule_checks", "rule_classify", "dbscan_cluster", "DegenerateCloud", "ransac_ground",
    "DegenerateCluster", "LShapeFit", "l_shape_fit", "STAGES", "DetectedVehicle",
    "FrameDetections", "detect_frame", "crop_roi", "voxel_downsample",
]
