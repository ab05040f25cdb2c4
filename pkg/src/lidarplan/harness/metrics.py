"""Offline metrics computed from a trace directory."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..geometry import box_corners, map_to_ego, rect_iou, wrap_angle

STATIC_SPEED = 0.5


class TraceError(ValueError):
    pass


def _require(path: Path) -> Path:
    if not path.exists():
        raise TraceError(f"missing trace file {path}")
    return path


def _read_csv(path: Path) -> Dict[str, np.ndarray]:
    with open(_require(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise TraceError(f"{path} holds no records")
    header, body = rows[0], rows[1:]
    cols: Dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in body]
        try:
            cols[name] = np.array([float(x) if x != "" else np.nan for x in raw])
        except ValueError:
            cols[name] = np.array(raw, dtype=object)
    return cols


def load_plans(trace_dir) -> Dict[str, np.ndarray]:
    return _read_csv(Path(trace_dir) / "plans.csv")


def load_timing(trace_dir) -> Dict[str, np.ndarray]:
    return _read_csv(Path(trace_dir) / "timing.csv")


def load_world(trace_dir) -> Dict[str, np.ndarray]:
    return _read_csv(Path(trace_dir) / "world.csv")


def load_jsonl(path) -> List[dict]:
    with open(_require(Path(path))) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- perception accuracy ----------------------------------------------------

@dataclass
class PerceptionReport:
    range_m: float
    dynamic_only: bool
    source: str
    frames: int
    gt_total: int
    matched: int
    recall: float
    miou: float
    orientation_error_deg: Tuple[float, float]
    speed_error: Tuple[float, float]
    per_frame: List[Tuple[int, int, int, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("per_frame")
        return d


def greedy_match(gt_boxes: List[np.ndarray], det_boxes: List[np.ndarray]):
    """Pairs (gt, det, iou) taken greedily by descending IoU, IoU > 0 only."""
    cand = []
    for i, g in enumerate(gt_boxes):
        gc = g.mean(axis=0)
        for j, d in enumerate(det_boxes):
            if np.hypot(*(d.mean(axis=0) - gc)) > 10.0:
                continue
            iou = rect_iou(g, d)
            if iou > 0:
                cand.append((iou, i, j))
    cand.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_g, used_d, out = set(), set(), []
    for iou, i, j in cand:
        if i in used_g or j in used_d:
            continue
        used_g.add(i)
        used_d.add(j)
        out.append((i, j, iou))
    return out


def yaw_error_deg(a: float, b: float) -> float:
    """Absolute heading error modulo a half turn, in degrees."""
    d = abs(float(wrap_angle(a - b)))
    return math.degrees(min(d, math.pi - d))


def _frames_of_world(world: Dict[str, np.ndarray]):
    ticks = world["tick"].astype(int)
    order = np.argsort(ticks, kind="stable")
    bounds = np.flatnonzero(np.diff(ticks[order])) + 1
    for grp in np.split(order, bounds):
        yield int(ticks[grp[0]]), grp


def eval_perception(trace_dir, range_m: float = 20.0, dynamic_only: bool = False,
                    source: str = "tracks") -> PerceptionReport:
    """Recall, mean IoU and heading/speed error of the perceived objects.

    ``source`` selects the confirmed tracks handed to the planner
    (``tracks``) or the raw per-frame detector output (``detections``).
    """
    trace_dir = Path(trace_dir)
    world = load_world(trace_dir)
    if source == "tracks":
        recs = {r["tick"]: r["tracks"] for r in load_jsonl(trace_dir / "tracks.jsonl")}
    elif source == "detections":
        recs = {r["tick"]: r["detections"] for r in load_jsonl(trace_dir / "detections.jsonl")}
    else:
        raise ValueError("source must be 'tracks' or 'detections'")
    if not recs:
        raise TraceError("trace holds no perception records")

    gt_total = matched = frames = 0
    ious: List[float] = []
    yaw_err: List[float] = []
    spd_err: List[float] = []
    per_frame = []
    for tick, idx in _frames_of_world(world):
        if tick not in recs:
            continue
        frames += 1
        ids = world["id"][idx].astype(int)
        ego_i = idx[ids == 0][0]
        ex, ey, eyaw = world["x"][ego_i], world["y"][ego_i], world["yaw"][ego_i]
        gt = []
        for i in idx[ids != 0]:
            if math.hypot(world["x"][i] - ex, world["y"][i] - ey) > range_m:
                continue
            if dynamic_only and world["speed"][i] <= STATIC_SPEED:
                continue
            c = map_to_ego([(world["x"][i], world["y"][i])], (ex, ey), eyaw)[0]
            yaw = float(wrap_angle(world["yaw"][i] - eyaw))
            gt.append((box_corners(c, yaw, world["length"][i], world["width"][i]), yaw,
                       world["speed"][i]))
        dets = []
        for r in recs[tick]:
            if source == "tracks":
                x, y, yaw, v = r["state"][:4]
            else:
                (x, y), yaw, v = r["center"], r["yaw"], None
            dets.append((box_corners((x, y), yaw, r["extent"][0], r["extent"][1]), yaw, v))
        pairs = greedy_match([g[0] for g in gt], [d[0] for d in dets])
        gt_total += len(gt)
        matched += len(pairs)
        for i, j, iou in pairs:
            ious.append(iou)
            yaw_err.append(yaw_error_deg(dets[j][1], gt[i][1]))
            if dets[j][2] is not None:
                spd_err.append(abs(dets[j][2] - gt[i][2]))
        per_frame.append((tick, len(gt), len(pairs),
                          float(np.mean([p[2] for p in pairs])) if pairs else float("nan")))
    if frames == 0:
        raise TraceError("no frame has both ground truth and perception records")

    def stats(x):
        return (float(np.mean(x)), float(np.std(x))) if x else (float("nan"), float("nan"))

    return PerceptionReport(
        range_m, dynamic_only, source, frames, gt_total, matched,
        matched / gt_total if gt_total else 0.0,
        float(np.mean(ious)) if ious else 0.0,
        stats(yaw_err), stats(spd_err), per_frame)


def merge_reports(reports: List[PerceptionReport]) -> dict:
    """Pool several runs' counts (recall) and match-weighted means."""
    gt = sum(r.gt_total for r in reports)
    m = sum(r.matched for r in reports)

    def pooled(attr):
        w = [(r.matched, getattr(r, attr)[0] if isinstance(getattr(r, attr), tuple)
              else getattr(r, attr)) for r in reports if r.matched]
        return sum(a * b for a, b in w) / sum(a for a, _ in w) if w else float("nan")

    return {"frames": sum(r.frames for r in reports), "gt_total": gt, "matched": m,
            "recall": m / gt if gt else 0.0, "miou": pooled("miou"),
            "orientation_error_deg": pooled("orientation_error_deg"),
            "speed_error": pooled("speed_error")}


# --- closed-loop metrics ------------------------------------------------------

def collision_count(plans: Dict[str, np.ndarray]) -> int:
    hit = np.nan_to_num(plans["collision"]).astype(bool)
    return int(np.count_nonzero(hit[1:] & ~hit[:-1]) + int(hit[0])) if len(hit) else 0


def following_summary(plans: Dict[str, np.ndarray], settle_s: float = 20.0) -> dict:
    """Ground-truth gap statistics while following a vehicle.

    Samples count once the gap has first come within 0.5 m of the safe
    distance (and not before ``settle_s``), and only on ticks where the
    planner is in platoon mode.
    """
    t = plans["time"]
    gap = plans["lead_gap_gt"]
    following = np.isfinite(gap) & (plans["case"] == "platoon")
    near = following & (np.abs(gap - plans["d_safe"]) <= 0.5) & (t >= settle_s)
    if not near.any():
        return {"samples": 0}
    converged_at = float(t[np.flatnonzero(near)[0]])
    mask = following & (t >= converged_at)
    n = int(mask.sum())
    g = gap[mask]
    margin = g - plans["d_safe"][mask]
    mean = float(g.mean())
    return {
        "samples": n,
        "converged_at": converged_at,
        "mean": round(mean, 6),
        "std": round(float(g.std()), 6),
        "var": round(float(g.var()), 6),
        "min": round(float(g.min()), 6),
        "max": round(float(g.max()), 6),
        "min_margin_to_d_safe": round(float(margin.min()), 6),
        "max_rel_dev": round(float(np.max(np.abs(g - mean)) / mean), 6) if mean > 0 else None,
    }


def ego_speed_reached(plans, target: float, tol: float = 0.05) -> Optional[float]:
    """First time the ego speed is within ``tol`` of ``target``."""
    idx = np.flatnonzero(np.abs(plans["ego_speed"] - target) <= tol)
    return float(plans["time"][idx[0]]) if len(idx) else None
