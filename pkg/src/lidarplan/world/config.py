"""Scenario file schema and loader.

Scenario files are YAML documents. Every block maps onto a dataclass below;
unknown keys are rejected with their dotted key path, and missing keys take
the dataclass default.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Raised for unreadable or semantically invalid scenario files."""

    def __init__(self, message: str, key_path: str = "", line: Optional[int] = None):
        self.key_path = key_path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key_path:
            where.append(key_path)
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


# --- parameter blocks -------------------------------------------------------

@dataclass(frozen=True)
class LidarConfig:
    channels: int = 64
    vertical_fov: Tuple[float, float] = (-24.8, 2.0)
    horizontal_resolution: float = 0.4
    max_range: float = 50.0
    range_noise_sigma: float = 0.02
    mount_height: float = 1.45
    dropout_prob: float = 0.05


@dataclass(frozen=True)
class RansacConfig:
    distance_threshold: float = 0.15
    max_iterations: int = 100
    min_inlier_fraction: float = 0.3


@dataclass(frozen=True)
class DbscanConfig:
    epsilon: float = 0.7
    min_points: int = 4


@dataclass(frozen=True)
class ClassifierConfig:
    min_points: int = 8
    max_points: int = 5000
    width_range: Tuple[float, float] = (0.05, 3.0)
    length_range: Tuple[float, float] = (1.0, 6.5)
    area_range: Tuple[float, float] = (0.1, 18.0)
    width_length_ratio_range: Tuple[float, float] = (0.01, 1.0)


@dataclass(frozen=True)
class PerceptionConfig:
    roi_radius: float = 20.0
    voxel_size: float = 0.15
    lshape_step_deg: float = 1.0
    ransac: RansacConfig = field(default_factory=RansacConfig)
    dbscan: DbscanConfig = field(default_factory=DbscanConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)


@dataclass(frozen=True)
class TrackingConfig:
    gate: float = 2.5
    confirm_hits: int = 3
    confirm_window: int = 5
    max_misses: int = 5
    static_speed: float = 0.5
    sigma_accel: float = 1.5
    sigma_yaw_accel: float = 0.6
    meas_pos_sigma: float = 0.15
    meas_yaw_sigma: float = 0.05
    fd_velocity_sigma: float = 0.8
    fd_window: int = 6
    prior_length: float = 4.5
    prior_width: float = 1.9
    extent_alpha: float = 0.01


@dataclass(frozen=True)
class PlannerConfig:
    mu: float = 0.35
    g: float = 9.8
    d_wp: float = 2.0
    f_safe: float = 1.5
    t_s: float = 0.5
    t_est: float = 1.0
    d_buffer: float = 5.0
    v_appr: float = 3.0
    w: float = 12.0
    a_max: float = 2.5
    v_init: float = 6.0
    v_max: Optional[float] = None
    dt: float = 0.05
    braking_model: str = "paper"
    horizon_floor: float = 20.0
    pose_lookahead: int = 16
    align_threshold_deg: float = 30.0
    static_speed: float = 0.5
    ego_front_clearance: float = 3.4
    gt_radius: float = 20.0


@dataclass(frozen=True)
class ControlConfig:
    speed_gain: float = 4.0
    max_accel: float = 2.5
    max_decel: float = 6.0
    wheelbase: float = 2.9
    max_curvature: float = 0.2
    min_lookahead: float = 3.0


# --- world ------------------------------------------------------------------

@dataclass(frozen=True)
class LaneSpec:
    id: str
    type: str = "polyline"
    points: Tuple[Tuple[float, float], ...] = ()
    closed: bool = False
    width: float = 3.5
    speed_limit: float = 8.33
    # ring: rounded rectangle
    center: Tuple[float, float] = (0.0, 0.0)
    size: Tuple[float, float] = (0.0, 0.0)
    corner_radius: float = 0.0
    step: float = 0.5
    # straight
    start: Tuple[float, float] = (0.0, 0.0)
    heading_deg: float = 0.0
    length: float = 0.0
    # offset copy of another lane (left positive)
    parent: Optional[str] = None
    offset: float = 0.0
    # blend from one lane into another
    source: Optional[str] = None
    target: Optional[str] = None
    source_s: float = 0.0
    target_s: float = 0.0
    blend_length: float = 0.0
    tail: float = 0.0


@dataclass(frozen=True)
class ClutterSpec:
    center: Tuple[float, float]
    size: Tuple[float, float, float]
    yaw_deg: float = 0.0
    z_base: float = 0.0


@dataclass(frozen=True)
class GroundSpec:
    slope: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class MapSpec:
    lanes: Tuple[LaneSpec, ...] = ()
    clutter: Tuple[ClutterSpec, ...] = ()
    ground: GroundSpec = field(default_factory=GroundSpec)


@dataclass(frozen=True)
class VehicleSpec:
    id: int
    lane: str
    s0: float = 0.0
    v0: float = 0.0
    box: Tuple[float, float, float] = (4.5, 1.9, 1.5)
    # piecewise-constant acceleration keyed by time: (t_start, accel)
    profile: Tuple[Tuple[float, float], ...] = ()
    v_cap: float = 30.0


@dataclass(frozen=True)
class EgoSpec:
    route: Tuple[str, ...]
    s0: float = 0.0
    v0: float = 0.0
    box: Tuple[float, float, float] = (4.7, 1.9, 1.5)


@dataclass(frozen=True)
class ScenarioConfig:
    ego: EgoSpec
    map: MapSpec
    schema_version: int = SCHEMA_VERSION
    name: str = "scenario"
    seed: int = 0
    sim_dt: float = 0.05
    duration: float = 30.0
    traffic: Tuple[VehicleSpec, ...] = ()
    lidar: LidarConfig = field(default_factory=LidarConfig)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    tracking: TrackingConfig = field(default_factory=TrackingConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    control: ControlConfig = field(default_factory=ControlConfig)

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.sim_dt))


# --- generic dataclass builder ----------------------------------------------

def _convert(tp: Any, value: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ScenarioError("expected a mapping", path)
        return _build(tp, value, path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ScenarioError("expected a list", path)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ScenarioError(f"expected {len(args)} values, got {len(value)}", path)
        return tuple(_convert(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if tp is bool:
        if not isinstance(value, bool):
            raise ScenarioError("expected true/false", path)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError("expected an integer", path)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError("expected a number", path)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ScenarioError("expected a string", path)
        return value
    raise ScenarioError(f"unsupported field type {tp}", path)


def _build(cls, data: Dict[str, Any], path: str):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ScenarioError("unknown key", f"{path}.{key}" if path else str(key))
    kwargs = {}
    for f in dataclasses.fields(cls):
        sub = f"{path}.{f.name}" if path else f.name
        if f.name in data:
            kwargs[f.name] = _convert(hints[f.name], data[f.name], sub)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ScenarioError("missing required key", sub)
    return cls(**kwargs)


# --- semantic validation ----------------------------------------------------

def _check(cond: bool, msg: str, path: str) -> None:
    if not cond:
        raise ScenarioError(msg, path)


def validate(cfg: ScenarioConfig) -> None:
    _check(cfg.schema_version == SCHEMA_VERSION,
           f"unsupported schema_version (expected {SCHEMA_VERSION})", "schema_version")
    _check(cfg.sim_dt > 0, "must be > 0", "sim_dt")
    _check(cfg.duration > 0, "must be > 0", "duration")

    lane_ids = set()
    for i, lane in enumerate(cfg.map.lanes):
        p = f"map.lanes[{i}]"
        _check(lane.id not in lane_ids, f"duplicate lane id {lane.id!r}", f"{p}.id")
        _check(lane.type in ("polyline", "ring", "straight", "offset", "blend"),
               "must be one of polyline, ring, straight, offset, blend", f"{p}.type")
        _check(lane.width > 0, "must be > 0", f"{p}.width")
        _check(lane.speed_limit > 0, "must be > 0", f"{p}.speed_limit")
        if lane.type == "polyline":
            _check(len(lane.points) >= 2, "needs at least 2 points", f"{p}.points")
        if lane.type == "ring":
            _check(lane.size[0] > 0 and lane.size[1] > 0, "must be > 0", f"{p}.size")
            _check(0 <= lane.corner_radius <= 0.5 * min(lane.size),
                   "must be within [0, min(size)/2]", f"{p}.corner_radius")
        if lane.type == "straight":
            _check(lane.length > 0, "must be > 0", f"{p}.length")
        if lane.type == "offset":
            _check(lane.parent in lane_ids, f"unknown lane {lane.parent!r}", f"{p}.parent")
        if lane.type == "blend":
            _check(lane.source in lane_ids, f"unknown lane {lane.source!r}", f"{p}.source")
            _check(lane.target in lane_ids, f"unknown lane {lane.target!r}", f"{p}.target")
            _check(lane.blend_length > 0, "must be > 0", f"{p}.blend_length")
        lane_ids.add(lane.id)

    _check(len(cfg.ego.route) > 0, "route must not be empty", "ego.route")
    for i, ref in enumerate(cfg.ego.route):
        _check(ref in lane_ids, f"unknown lane {ref!r}", f"ego.route[{i}]")
    _check(all(d > 0 for d in cfg.ego.box), "box dims must be > 0", "ego.box")
    _check(cfg.ego.v0 >= 0, "must be >= 0", "ego.v0")

    ids = set()
    for i, v in enumerate(cfg.traffic):
        p = f"traffic[{i}]"
        _check(v.id > 0, "vehicle ids must be positive (0 is the ego)", f"{p}.id")
        _check(v.id not in ids, f"duplicate vehicle id {v.id}", f"{p}.id")
        ids.add(v.id)
        _check(v.lane in lane_ids, f"unknown lane {v.lane!r}", f"{p}.lane")
        for j, name in enumerate(("length", "width", "height")):
            _check(v.box[j] > 0, f"box {name} must be > 0", f"{p}.box[{j}]")
        _check(v.v0 >= 0, "must be >= 0", f"{p}.v0")

    for i, c in enumerate(cfg.map.clutter):
        _check(all(d > 0 for d in c.size), "size must be > 0", f"map.clutter[{i}].size")

    lc = cfg.lidar
    _check(lc.channels >= 1, "must be >= 1", "lidar.channels")
    _check(lc.vertical_fov[0] < lc.vertical_fov[1], "min must be < max", "lidar.vertical_fov")
    _check(lc.horizontal_resolution > 0, "must be > 0", "lidar.horizontal_resolution")
    _check(lc.max_range > 0, "must be > 0", "lidar.max_range")
    _check(lc.range_noise_sigma >= 0, "must be >= 0", "lidar.range_noise_sigma")
    _check(0 <= lc.dropout_prob <= 1, "must be in [0, 1]", "lidar.dropout_prob")

    pc = cfg.perception
    for name in ("roi_radius", "voxel_size", "lshape_step_deg"):
        _check(getattr(pc, name) > 0, "must be > 0", f"perception.{name}")
    _check(pc.ransac.distance_threshold > 0, "must be > 0", "perception.ransac.distance_threshold")
    _check(pc.ransac.max_iterations > 0, "must be > 0", "perception.ransac.max_iterations")
    _check(0 < pc.ransac.min_inlier_fraction <= 1, "must be in (0, 1]",
           "perception.ransac.min_inlier_fraction")
    _check(pc.dbscan.epsilon > 0, "must be > 0", "perception.dbscan.epsilon")
    _check(pc.dbscan.min_points > 0, "must be > 0", "perception.dbscan.min_points")
    cc = pc.classifier
    for name in ("width_range", "length_range", "area_range", "width_length_ratio_range"):
        lo, hi = getattr(cc, name)
        _check(0 < lo <= hi, "must satisfy 0 < min <= max", f"perception.classifier.{name}")
    _check(0 < cc.min_points <= cc.max_points, "must satisfy 0 < min <= max",
           "perception.classifier.min_points")
    _check(cc.width_range[1] <= cc.length_range[1], "max width must not exceed max length",
           "perception.classifier.width_range")

    pl = cfg.planner
    for name in ("mu", "g", "d_wp", "t_s", "t_est", "d_buffer", "v_appr", "w", "a_max",
                 "v_init", "dt", "horizon_floor"):
        _check(getattr(pl, name) > 0, "must be > 0", f"planner.{name}")
    _check(pl.f_safe >= 1, "must be >= 1", "planner.f_safe")
    _check(pl.braking_model in ("paper", "kinematic"), "must be 'paper' or 'kinematic'",
           "planner.braking_model")
    _check(pl.v_max is None or pl.v_max > 0, "must be > 0", "planner.v_max")

    tc = cfg.tracking
    _check(tc.gate > 0, "must be > 0", "tracking.gate")
    _check(1 <= tc.confirm_hits <= tc.confirm_window, "must satisfy 1 <= hits <= window",
           "tracking.confirm_hits")
    _check(tc.max_misses >= 1, "must be >= 1", "tracking.max_misses")


def load_scenario(source: Union[str, Path]) -> ScenarioConfig:
    """Parse and validate a scenario.

    ``source`` is either a path to a YAML file or the YAML text itself.
    """
    text = _read_text(source)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"parse error: {getattr(exc, 'problem', exc)}", line=line) from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at top level")
    cfg = _build(ScenarioConfig, data, "")
    validate(cfg)
    return cfg


def _read_text(source: Union[str, Path]) -> str:
    if isinstance(source, Path):
        return source.read_text()
    if "\n" not in source and source.strip().endswith((".yaml", ".yml")):
        return Path(source).read_text()
    return source


def scenario_to_dict(cfg: ScenarioConfig) -> Dict[str, Any]:
    def conv(v):
        if isinstance(v, tuple):
            return [conv(x) for x in v]
        if dataclasses.is_dataclass(v):
            return {k: conv(x) for k, x in dataclasses.asdict(v).items()}
        return v
    return {k: conv(v) for k, v in dataclasses.asdict(cfg).items()}


def bundled_scenarios() -> List[str]:
    here = Path(__file__).resolve().parent.parent / "scenarios"
    return sorted(p.stem for p in here.glob("*.yaml"))


def bundled_scenario_path(name: str) -> Path:
    path = Path(__file__).resolve().parent.parent / "scenarios" / f"{name}.yaml"
    if not path.exists():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return path
