"""Figures rendered from trace files (headless matplotlib)."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_following(plans: Dict[str, np.ndarray], path: Path, title: str = "") -> Path:
    """Gap to the vehicle ahead next to the planner's safe distance, plus speeds."""
    t = plans["time"]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 5.5), sharex=True)
    ax1.plot(t, plans["lead_gap_gt"], lw=1.0, label="gap (ground truth)")
    ax1.plot(t, plans["d_safe"], lw=1.0, ls="--", label="d_safe")
    ax1.set_ylabel("m")
    ax1.legend(loc="upper right")
    ax1.set_title(title or "following distance")
    ax2.plot(t, plans["ego_speed"], lw=1.0, label="ego")
    ax2.plot(t, plans["lead_speed_gt"], lw=1.0, label="vehicle ahead")
    ax2.plot(t, plans["v_exc"], lw=0.6, alpha=0.6, label="v_exc")
    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("m/s")
    ax2.legend(loc="upper right")
    return _save(fig, path)


def plot_route(plans: Dict[str, np.ndarray], world: Optional[Dict[str, np.ndarray]],
               path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 5))
    if world is not None:
        ids = world["id"].astype(int)
        for vid in np.unique(ids[ids != 0])[:20]:
            m = ids == vid
            ax.plot(world["x"][m], world["y"][m], lw=0.5, alpha=0.5)
    ax.plot(plans["ego_x"], plans["ego_y"], "k", lw=1.2, label="ego")
    hit = np.nan_to_num(plans["collision"]).astype(bool)
    if hit.any():
        ax.plot(plans["ego_x"][hit], plans["ego_y"][hit], "rx", label="collision")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_latency(stages: Dict[str, tuple], path: Path, budget_s: float = 0.05) -> Path:
    names = list(stages)
    avg = [stages[n][0] * 1e3 for n in names]
    mx = [stages[n][1] * 1e3 for n in names]
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(names) + 1.5))
    ax.barh(y - 0.2, avg, 0.4, label="avg")
    ax.barh(y + 0.2, mx, 0.4, label="max", alpha=0.6)
    ax.axvline(budget_s * 1e3, color="r", ls="--", lw=1, label="50 ms budget")
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.set_xlabel("ms")
    ax.legend(loc="lower right")
    return _save(fig, path)


def plot_iou(per_frame: List[tuple], path: Path) -> Path:
    ticks = np.array([p[0] for p in per_frame])
    gt = np.array([p[1] for p in per_frame])
    matched = np.array([p[2] for p in per_frame])
    iou = np.array([p[3] for p in per_frame])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax1.plot(ticks, gt, lw=0.8, label="ground truth in range")
    ax1.plot(ticks, matched, lw=0.8, label="matched")
    ax1.set_ylabel("vehicles")
    ax1.legend(loc="upper right")
    ax2.plot(ticks, iou, ".", ms=2)
    ax2.set_ylabel("mean IoU")
    ax2.set_xlabel("tick")
    ax2.set_ylim(0, 1)
    return _save(fig, path)
