"""Deterministic 2.5D world: scripted traffic, ego kinematics, ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np

from ..geometry import box_corners, map_to_ego, wrap_angle
from .config import ControlConfig, ScenarioConfig
from .roads import Lane, Route, build_lanes

EGO_ID = 0


@dataclass(frozen=True)
class VehicleState:
    id: int
    position: Tuple[float, float]
    yaw: float
    speed: float
    box: Tuple[float, float, float]
    z_base: float = 0.0

    def corners(self) -> np.ndarray:
        return box_corners(self.position, self.yaw, self.box[0], self.box[1])


@dataclass(frozen=True)
class StaticBox:
    center: Tuple[float, float]
    yaw: float
    size: Tuple[float, float, float]
    z_base: float = 0.0

    def corners(self) -> np.ndarray:
        return box_corners(self.center, self.yaw, self.size[0], self.size[1])


@dataclass(frozen=True)
class GlobalWaypointPath:
    points: np.ndarray
    spacing: float
    end_of_route: bool = False


@dataclass(frozen=True)
class _Scripted:
    id: int
    lane: str
    s: float
    v: float
    box: Tuple[float, float, float]
    profile: Tuple[Tuple[float, float], ...]
    v_cap: float
    stopped: bool = False


@dataclass(frozen=True)
class EgoState:
    position: Tuple[float, float]
    yaw: float
    speed: float
    route_s: float
    box: Tuple[float, float, float]
    accel_cmd: float = 0.0
    curvature_cmd: float = 0.0


class RoadMap:
    """Static part of the world, shared between snapshots."""

    def __init__(self, cfg: ScenarioConfig):
        self.lanes: Dict[str, Lane] = build_lanes(cfg.map)
        self.route = Route([self.lanes[r] for r in cfg.ego.route])
        self.clutter = tuple(
            StaticBox(c.center, math.radians(c.yaw_deg), c.size, c.z_base) for c in cfg.map.clutter
        )
        self.ground_slope = cfg.map.ground.slope


@dataclass(frozen=True)
class World:
    config: ScenarioConfig
    roadmap: RoadMap
    tick: int
    time: float
    ego: EgoState
    scripted: Tuple[_Scripted, ...]

    @cached_property
    def vehicles(self) -> Tuple[VehicleState, ...]:
        out = []
        for v in self.scripted:
            pos, yaw = self.roadmap.lanes[v.lane].pose_at(v.s)
            out.append(VehicleState(v.id, (float(pos[0, 0]), float(pos[0, 1])),
                                    float(wrap_angle(float(yaw[0]))), v.v, v.box))
        return tuple(out)

    @property
    def ego_state(self) -> VehicleState:
        e = self.ego
        return VehicleState(EGO_ID, e.position, e.yaw, e.speed, e.box)

    def all_states(self) -> Tuple[VehicleState, ...]:
        return (self.ego_state,) + self.vehicles


def make_world(cfg: ScenarioConfig) -> World:
    roadmap = RoadMap(cfg)
    route = roadmap.route
    pos, yaw = route.lane.pose_at(cfg.ego.s0)
    ego = EgoState((float(pos[0, 0]), float(pos[0, 1])), float(wrap_angle(float(yaw[0]))),
                   cfg.ego.v0, float(route.lane.normalize_s(cfg.ego.s0)), cfg.ego.box)
    scripted = tuple(
        _Scripted(v.id, v.lane, float(roadmap.lanes[v.lane].normalize_s(v.s0)), v.v0, v.box,
                  tuple(sorted(v.profile)), v.v_cap)
        for v in cfg.traffic
    )
    return World(cfg, roadmap, 0, 0.0, ego, scripted)


def _profile_accel(profile, t: float) -> float:
    a = 0.0
    for t0, acc in profile:
        if t + 1e-12 >= t0:
            a = acc
        else:
            break
    return a


def _step_scripted(v: _Scripted, lane: Lane, t: float, dt: float) -> _Scripted:
    if v.stopped:
        return v
    a = _profile_accel(v.profile, t)
    v_new = min(max(v.v + a * dt, 0.0), v.v_cap)
    s_new = v.s + 0.5 * (v.v + v_new) * dt
    if lane.closed:
        return replace(v, s=float(s_new % lane.length), v=v_new)
    if s_new >= lane.length:
        return replace(v, s=lane.length, v=0.0, stopped=True)
    return replace(v, s=s_new, v=v_new)


def apply_actuation(world: World, accel: float, curvature: float) -> World:
    return replace(world, ego=replace(world.ego, accel_cmd=accel, curvature_cmd=curvature))


def step_world(world: World, dt: float, control: ControlConfig | None = None) -> World:
    """Advance every vehicle by ``dt`` seconds and return the new snapshot."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    control = control or world.config.control
    scripted = tuple(
        _step_scripted(v, world.roadmap.lanes[v.lane], world.time, dt) for v in world.scripted
    )
    e = world.ego
    accel = min(max(e.accel_cmd, -control.max_decel), control.max_accel)
    kappa = min(max(e.curvature_cmd, -control.max_curvature), control.max_curvature)
    v_new = max(e.speed + accel * dt, 0.0)
    v_mid = 0.5 * (e.speed + v_new)
    # kinematic bicycle in curvature form, midpoint heading
    yaw_mid = e.yaw + 0.5 * v_mid * kappa * dt
    x = e.position[0] + v_mid * math.cos(yaw_mid) * dt
    y = e.position[1] + v_mid * math.sin(yaw_mid) * dt
    yaw = wrap_angle(e.yaw + v_mid * kappa * dt)
    route = world.roadmap.route
    s = route.lane.project((x, y), s_hint=e.route_s + v_mid * dt)
    ego = replace(e, position=(x, y), yaw=float(yaw), speed=v_new, route_s=s)
    return replace(world, tick=world.tick + 1, time=world.time + dt, ego=ego, scripted=scripted)


def ground_truth_neighbors(world: World, ego_id: int, radius: float) -> List[VehicleState]:
    """Non-ego vehicles within ``radius`` of the ego, in the ego frame, nearest first."""
    if ego_id != EGO_ID:
        raise KeyError(f"unknown ego id {ego_id}")
    e = world.ego
    out = []
    for v in world.vehicles:
        d = math.hypot(v.position[0] - e.position[0], v.position[1] - e.position[1])
        if d > radius:
            continue
        p = map_to_ego([v.position], e.position, e.yaw)[0]
        out.append((d, VehicleState(v.id, (float(p[0]), float(p[1])),
                                    float(wrap_angle(v.yaw - e.yaw)), v.speed, v.box, v.z_base)))
    out.sort(key=lambda t: (t[0], t[1].id))
    return [v for _, v in out]


def global_waypoints(world: World, ego_id: int, horizon_m: float,
                     d_wp: float | None = None) -> GlobalWaypointPath:
    """Route centerline points ahead of the ego at spacing ``d_wp`` (map frame)."""
    if ego_id != EGO_ID:
        raise KeyError(f"unknown ego id {ego_id}")
    d_wp = d_wp or world.config.planner.d_wp
    n = int(math.ceil(horizon_m / d_wp - 1e-9)) if horizon_m > 0 else 0
    route = world.roadmap.route
    s0 = world.ego.route_s
    s = s0 + d_wp * np.arange(1, n + 1)
    end = False
    if not route.closed:
        keep = s <= route.length + 1e-9
        end = not bool(keep.all())
        s = s[keep]
    if len(s) == 0:
        return GlobalWaypointPath(np.zeros((0, 2)), d_wp, end)
    pts, _ = route.lane.pose_at(s)
    return GlobalWaypointPath(pts, d_wp, end)


def speed_limit(world: World) -> float:
    return world.roadmap.route.speed_limit_at(world.ego.route_s)


def scene_boxes(world: World, include_ego: bool = False):
    """All solid objects as (center, yaw, (L, W, H), z_base, vehicle_id or -1)."""
    out = []
    if include_ego:
        e = world.ego
        out.append((e.position, e.yaw, e.box, 0.0, EGO_ID))
    for v in world.vehicles:
        out.append((v.position, v.yaw, v.box, v.z_base, v.id))
    for c in world.roadmap.clutter:
        out.append((c.center, c.yaw, c.size, c.z_base, -1))
    return out
