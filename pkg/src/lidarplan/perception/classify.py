"""Rule-based vehicle classifier on BEV box geometry."""

from __future__ import annotations

from typing import Dict, Tuple

from ..world.config import ClassifierConfig


def _within(x: float, rng: Tuple[float, float]) -> bool:
    return rng[0] <= x <= rng[1]


def rule_checks(extent: Tuple[float, float], n_points: int,
                config: ClassifierConfig) -> Dict[str, bool]:
    length, width = extent
    ratio = width / length if length > 0 else float("inf")
    return {
        "n_points": config.min_points <= n_points <= config.max_points,
        "width": _within(width, config.width_range),
        "length": _within(length, config.length_range),
        "area": _within(length * width, config.area_range),
        "width_length_ratio": _within(ratio, config.width_length_ratio_range),
    }


def rule_classify(extent: Tuple[float, float], n_points: int,
                  config: ClassifierConfig) -> bool:
    """Accept a candidate only when every individual rule passes."""
    return all(rule_checks(extent, n_points, config).values())
