from .association import Association, assign, distance_matrix, gnn_associate
from .ego_motion import (EgoMotion, compensate_ego_motion, compensate_history,
                         compensation_matrix, motion_from_poses)
from .tracker import (CONFIRMED, DEAD, TENTATIVE, InsufficientHistory, Track, TrackedObject,
                      Tracker, VelocityEstimate, disambiguate_yaw, estimate_velocity,
                      finite_difference, fuse_velocity, manage_tracks, new_track, ukf_predict,
                      ukf_update)
from .ukf import SigmaParams, SigmaPointFailure, ctrv_fx, ctrv_process_noise, is_pd

__all__ = [
    "Association", "assign", "distance_matrix", "gnn_associate", "EgoMotion",
    "compensate_ego_motion", "compensate_history", "compensation_matrix", "motion_from_poses",
    "CONFIRMED", "DEAD", "TENTATIVE", "InsufficientHistory", "Track", "TrackedObject", "Tracker",
    "VelocityEstimate", "disambiguate_yaw", "estimate_velocity", "finite_difference",
    "fuse_velocity", "manage_tracks", "new_track", "ukf_predict", "ukf_update", "SigmaParams",
    "SigmaPointFailure", "ctrv_fx", "ctrv_process_noise", "is_pd",
]
