"""Per-stage latency statistics from a trace's timing records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np

REALTIME_BUDGET_S = 0.05


@dataclass(frozen=True)
class LatencyReport:
    stages: Dict[str, Tuple[float, float]]  # seconds: (avg, max)
    frames: int
    planner_pass: bool
    perception_pass: bool

    @property
    def passed(self) -> bool:
        return self.planner_pass and self.perception_pass

    def to_dict(self) -> dict:
        total = self.stages.get("tick_total", (0.0, 0.0))[0]
        return {
            "frames": self.frames,
            "budget_s": REALTIME_BUDGET_S,
            "stages": {k: {"avg_s": a, "max_s": m} for k, (a, m) in self.stages.items()},
            "planner_pass": self.planner_pass,
            "perception_pass": self.perception_pass,
            "loop_rate_hz": (1.0 / total) if total > 0 else None,
        }


def bench_latency(timing: Mapping[str, np.ndarray], skip_zero: bool = True) -> LatencyReport:
    """Average and worst latency per stage.

    ``timing`` maps stage names to per-tick microseconds (a ``tick`` column
    is ignored). Stages that never ran (all zeros) are left out when
    ``skip_zero`` is set.
    """
    stages = {}
    frames = 0
    for name, col in timing.items():
        if name == "tick":
            continue
        v = np.asarray(col, dtype=float) * 1e-6
        frames = max(frames, len(v))
        if len(v) == 0 or (skip_zero and not np.any(v)):
            continue
        stages[name] = (float(v.mean()), float(v.max()))
    planner = stages.get("planner_total", (0.0, 0.0))[0]
    perception = stages.get("perception_total", (0.0, 0.0))[0]
    return LatencyReport(stages, frames, planner <= REALTIME_BUDGET_S,
                         perception <= REALTIME_BUDGET_S)
