from .bench import LatencyReport, bench_latency
from .control import ControlCommand, control, pure_pursuit
from .loop import MODES, RunResult, ego_collides, run_closed_loop
from .metrics import (PerceptionReport, TraceError, collision_count, eval_perception,
                      following_summary, greedy_match, load_plans, load_timing, load_world,
                      merge_reports, yaw_error_deg)

__all__ = [
    "LatencyReport", "bench_latency", "ControlCommand", "control", "pure_pursuit", "MODES",
    "RunResult", "ego_collides", "run_closed_loop", "PerceptionReport", "TraceError",
    "collision_count", "eval_perception", "following_summary", "greedy_match", "load_plans",
    "load_timing", "load_world", "merge_reports", "yaw_error_deg",
]
