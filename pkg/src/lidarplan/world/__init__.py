from .config import (
    ControlConfig,
    LidarConfig,
    PerceptionConfig,
    PlannerConfig,
    ScenarioConfig,
    ScenarioError,
    TrackingConfig,
    bundled_scenario_path,
    bundled_scenarios,
    load_scenario,
)
from .sim import (
    EGO_ID,
    GlobalWaypointPath,
    StaticBox,
    VehicleState,
    World,
    apply_actuation,
    global_waypoints,
    ground_truth_neighbors,
    make_world,
    scene_boxes,
    speed_limit,
    step_world,
)

__all__ = [
    "ControlConfig", "LidarConfig", "PerceptionConfig", "PlannerConfig", "ScenarioConfig",
    "ScenarioError", "TrackingConfig", "bundled_scenario_path", "bundled_scenarios",
    "load_scenario", "EGO_ID", "GlobalWaypointPath", "StaticBox", "VehicleState", "World",
    "apply_actuation", "global_waypoints", "ground_truth_neighbors", "make_world",
    "scene_boxes", "speed_limit", "step_world",
]
