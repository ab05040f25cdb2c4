"""Command line entry point: run, eval, bench, replay."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..world import ScenarioError, bundled_scenario_path, bundled_scenarios, load_scenario


def _scenario_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    if name in bundled_scenarios():
        return bundled_scenario_path(name)
    raise FileNotFoundError(f"no scenario file or bundled scenario named {name!r}")


def _trace_dir(p: str) -> Path:
    d = Path(p)
    if not d.is_dir():
        raise FileNotFoundError(f"trace directory {d} does not exist")
    return d


def _finite(obj):
    """Replace NaN with None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and obj != obj:
        return None
    return obj


def cmd_run(args) -> int:
    from .loop import run_closed_loop
    path = _scenario_path(args.scenario)
    mode = {"gt": "gt", "ground_truth": "gt", "lidar": "lidar"}[args.mode]

    def progress(k, n):
        if args.verbose and (k % 200 == 0 or k == n):
            print(f"  tick {k}/{n}", file=sys.stderr)

    res = run_closed_loop(path, mode, seed=args.seed, out=args.out, duration=args.duration,
                          save_clouds=args.save_clouds, progress=progress)
    r = res.report
    print(f"trace={res.trace_dir} scenario={r['scenario']} mode={r['mode']} "
          f"ticks={r['ticks']} collisions={r['collision_count']}")
    return 0


def cmd_eval(args) -> int:
    from .metrics import (collision_count, eval_perception, following_summary, load_plans,
                          load_world)
    from .report import plot_following, plot_iou, plot_route
    trace = _trace_dir(args.trace)
    out = Path(args.out) if args.out else trace
    out.mkdir(parents=True, exist_ok=True)
    plans = load_plans(trace)
    result = {"trace": str(trace), "following": following_summary(plans)}
    result["collision_count"] = collision_count(plans)
    figures = [plot_following(plans, out / "following.png"),
               plot_route(plans, load_world(trace), out / "route.png")]
    has_dets = (trace / "detections.jsonl").exists() and (trace / "detections.jsonl").stat().st_size
    if has_dets:
        rows = []
        for src in ("tracks", "detections"):
            rep = eval_perception(trace, args.range, args.dynamic, src)
            result[f"perception_{src}"] = rep.to_dict()
            rows.append(rep)
        figures.append(plot_iou(rows[0].per_frame, out / "iou.png"))
        with open(out / "eval_frames.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tick", "gt_in_range", "matched", "mean_iou"])
            for t, g, m, iou in rows[0].per_frame:
                w.writerow([t, g, m, "" if np.isnan(iou) else f"{iou:.6f}"])
    result["figures"] = [p.name for p in figures]
    result = _finite(result)
    (out / "eval.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print("---- eval ----")
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    from .bench import bench_latency
    from .metrics import load_timing
    from .report import plot_latency
    trace = _trace_dir(args.trace)
    out = Path(args.out) if args.out else trace
    out.mkdir(parents=True, exist_ok=True)
    rep = bench_latency(load_timing(trace))
    d = rep.to_dict()
    (out / "bench.json").write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    with open(out / "bench.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage", "avg_s", "max_s"])
        for k, (a, m) in rep.stages.items():
            w.writerow([k, f"{a:.6f}", f"{m:.6f}"])
    plot_latency(rep.stages, out / "latency.png")
    print("stage,avg_ms,max_ms")
    for k, (a, m) in rep.stages.items():
        print(f"{k},{a * 1e3:.3f},{m * 1e3:.3f}")
    print(f"planner_total_pass={rep.planner_pass} perception_total_pass={rep.perception_pass}")
    return 0


def cmd_replay(args) -> int:
    from ..lidar import dump_cloud, scan
    from ..perception import detect_frame
    from .loop import frame_rngs
    from .metrics import load_jsonl, load_world
    from ..world import make_world, scene_boxes
    trace = _trace_dir(args.trace)
    cfg = load_scenario((trace / "scenario.copy").read_text())
    report = json.loads((trace / "report.json").read_text())
    seed = report.get("seed", cfg.seed)
    k = args.frame
    out = Path(args.out) if args.out else trace / "replay"
    out.mkdir(parents=True, exist_ok=True)
    # the per-frame random streams make the scan reproducible from world.csv
    world = load_world(trace)
    m = world["tick"] == k
    if not m.any():
        raise ValueError(f"frame {k} is not in the trace")
    ids = world["id"][m].astype(int)
    rows = {int(i): j for i, j in zip(ids, np.flatnonzero(m))}
    e = rows[0]
    pose = (world["x"][e], world["y"][e], world["yaw"][e])
    static = [b for b in scene_boxes(make_world(cfg)) if b[4] == -1]
    boxes = [((world["x"][j], world["y"][j]), world["yaw"][j],
              (world["length"][j], world["width"][j], world["height"][j]), 0.0, i)
             for i, j in rows.items() if i != 0] + static
    rng_scan, _ = frame_rngs(seed, k)
    cloud = scan(boxes, pose, cfg.lidar, rng_scan, cfg.map.ground.slope,
                 float(world["time"][e]), k)
    _, rng_det = frame_rngs(seed, k)
    frame = detect_frame(cloud, cfg.perception, rng_det)
    dump_cloud(out / f"{k:06d}", cloud, pose, cfg.lidar)
    rec = frame.to_record()
    rec["tick"] = k
    logged = [r for r in load_jsonl(trace / "detections.jsonl") if r.get("tick") == k] \
        if (trace / "detections.jsonl").exists() else []
    rec["logged"] = logged[0]["detections"] if logged else None
    (out / f"{k:06d}_detections.json").write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    print(f"frame={k} points={len(cloud)} detections={len(frame.detections)} out={out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lidarplan", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a closed-loop scenario and write a trace")
    r.add_argument("--scenario", required=True, help="YAML path or bundled scenario name")
    r.add_argument("--mode", choices=["gt", "ground_truth", "lidar"], default="gt")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", required=True)
    r.add_argument("--duration", type=float, default=None, help="override seconds")
    r.add_argument("--save-clouds", action="store_true")
    r.add_argument("-v", "--verbose", action="store_true")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="perception and following metrics plus figures")
    e.add_argument("--trace", required=True)
    e.add_argument("--range", type=float, default=20.0)
    e.add_argument("--dynamic", action="store_true")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="per-stage latency report")
    b.add_argument("--trace", required=True)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    rp = sub.add_parser("replay", help="re-create one frame's cloud and detections")
    rp.add_argument("--trace", required=True)
    rp.add_argument("--frame", type=int, required=True)
    rp.add_argument("--out", default=None)
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ScenarioError, ValueError, KeyError) as exc:
        print(f"lidarplan {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
