from .collision import (Blocking, CheckResult, Obstacle, VBound, extend_bounds,
                        generate_collision_free_path, intersect_check, intersect_check_verbatim)
from .path import (EgoTrajectory, TooFewWaypoints, braking_distance, bspline_resample,
                   to_ego_frame, waypoint_count)
from .planner import PlanResult, plan
from .speed import (NORMAL, OBSTACLE, PLATOON, SpeedDecision, clamp_speed, is_leader,
                    plan_speed, reachable_speed, safe_distance, speed_normal, speed_obstacle,
                    speed_platoon)

__all__ = [
    "Blocking", "CheckResult", "Obstacle", "VBound", "extend_bounds",
    "generate_collision_free_path", "intersect_check", "intersect_check_verbatim",
    "EgoTrajectory", "TooFewWaypoints", "braking_distance", "bspline_resample", "to_ego_frame",
    "waypoint_count", "PlanResult", "plan", "NORMAL", "OBSTACLE", "PLATOON", "SpeedDecision",
    "clamp_speed", "is_leader", "plan_speed", "reachable_speed", "safe_distance",
    "speed_normal", "speed_obstacle", "speed_platoon",
]
