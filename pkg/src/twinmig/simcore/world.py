"""World state and the per-slot transition.

One step: the vehicle advances along its waypoint loop, every node drains
compute_cps * dt cycles and receives its offloaded plus background arrivals,
and the serving node is re-selected after the move. All randomness in the
background process is a pure function of (seed, time_slot), so two worlds
with equal seeds evolve identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from twinmig.simcore.channel import ChannelParams
from twinmig.simcore.geometry import Position, distance
from twinmig.simcore.nodes import EdgeNode, NodeKind, VehicleState
from twinmig.simcore.scenario import Scenario


class EpisodeOver(RuntimeError):
    """Raised when step_world is called past the scenario horizon."""


@dataclass
class WorldState:
    scenario: Scenario
    time_slot: int
    nodes: list[EdgeNode]
    vehicle: VehicleState
    serving_node: int
    rng_seed: int
    route_leg: int = 0                      # index of the waypoint being approached
    background_walk: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def node(self, node_id: int) -> EdgeNode:
        return self.nodes[node_id]

    @property
    def rsus(self) -> list[EdgeNode]:
        return [n for n in self.nodes if n.is_rsu]

    @property
    def uavs(self) -> list[EdgeNode]:
        return [n for n in self.nodes if n.is_uav]

    @property
    def done(self) -> bool:
        return self.time_slot >= self.scenario.t_max

    def copy(self) -> "WorldState":
        return WorldState(
            scenario=self.scenario,
            time_slot=self.time_slot,
            nodes=[replace(n) for n in self.nodes],
            vehicle=replace(self.vehicle),
            serving_node=self.serving_node,
            rng_seed=self.rng_seed,
            route_leg=self.route_leg,
            background_walk=self.background_walk.copy(),
        )


def make_world(scenario: Scenario, seed: int) -> WorldState:
    """Build the initial world: grid RSUs, UAVs at their start node, vehicle
    at the first route waypoint, serving node already selected."""
    scenario.validate()
    channel = ChannelParams(
        channel_gain_a=scenario.channel.gain_a,
        light_speed_mps=scenario.channel.light_speed_mps,
        carrier_freq_hz=scenario.channel.carrier_freq_hz,
        noise_power_w=scenario.channel.noise_power_w,
        downlink_bandwidth_hz=scenario.channel.downlink_bandwidth_hz,
    )

    nodes: list[EdgeNode] = []
    for rid in range(scenario.num_rsus):
        x, y = scenario.rsu_position(rid)
        nodes.append(EdgeNode(
            id=rid,
            kind=NodeKind.RSU,
            pos=Position(x, y, 0.0),
            compute_cps=scenario.rsu.compute_cps,
            workload_max=scenario.rsu.workload_max,
            inter_node_bandwidth_bps=scenario.rsu.inter_node_bandwidth_bps,
            coverage_radius_m=scenario.grid.coverage_radius_m,
            workload_cycles=scenario.rsu.initial_workload_of(rid, scenario.num_rsus),
            channel=channel,
        ))
    for k in range(scenario.uav.count):
        x, y = scenario.rsu_position(scenario.uav.start_node)
        nodes.append(EdgeNode(
            id=scenario.num_rsus + k,
            kind=NodeKind.UAV,
            pos=Position(x, y, scenario.uav.altitude_m),
            compute_cps=scenario.uav.compute_cps,
            workload_max=scenario.uav.workload_max,
            inter_node_bandwidth_bps=scenario.uav.inter_node_bandwidth_bps,
            coverage_radius_m=scenario.uav.assist_radius_m,
            channel=channel,
        ))

    route = scenario.vehicle.route or scenario.default_route()
    start = route[0]
    vehicle = VehicleState(
        pos=Position(start[0], start[1], 0.0),
        velocity_mps=(0.0, 0.0),
        transmit_power_w=scenario.vehicle.transmit_power_w,
        cycles_per_bit=scenario.vehicle.cycles_per_bit,
    )

    world = WorldState(
        scenario=scenario,
        time_slot=1,
        nodes=nodes,
        vehicle=vehicle,
        serving_node=0,
        rng_seed=int(seed),
        route_leg=1 % len(route),
        background_walk=np.zeros(scenario.num_rsus, dtype=np.float64),
    )
    world.vehicle.velocity_mps = _leg_velocity(world)
    world.serving_node = select_serving_node(world)
    return world


def select_serving_node(world: WorldState) -> int:
    """Nearest RSU whose coverage contains the vehicle (ties: lowest id);
    falls back to the nearest RSU when none is in range."""
    best_in_range: tuple[float, int] | None = None
    best_any: tuple[float, int] | None = None
    for node in world.nodes:
        if not node.is_rsu:
            continue
        d = distance(node.pos, world.vehicle.pos)
        key = (d, node.id)
        if best_any is None or key < best_any:
            best_any = key
        if d <= node.coverage_radius_m and (best_in_range is None or key < best_in_range):
            best_in_range = key
    if best_any is None:
        raise ValueError("world contains no RSU")
    return (best_in_range or best_any)[1]


def _leg_velocity(world: WorldState) -> tuple[float, float]:
    route = world.scenario.vehicle.route or world.scenario.default_route()
    speed = world.scenario.vehicle.speed_mps
    if speed == 0 or len(route) < 2:
        return (0.0, 0.0)
    target = route[world.route_leg]
    dx = target[0] - world.vehicle.pos.x
    dy = target[1] - world.vehicle.pos.y
    norm = math.hypot(dx, dy)
    if norm == 0:
        return (0.0, 0.0)
    return (speed * dx / norm, speed * dy / norm)


def _advance_vehicle(world: WorldState, dt: float) -> None:
    """Move along the waypoint loop for ``dt`` seconds, wrapping at the end."""
    route = world.scenario.vehicle.route or world.scenario.default_route()
    speed = world.scenario.vehicle.speed_mps
    if speed == 0 or len(route) < 2:
        world.vehicle.velocity_mps = (0.0, 0.0)
        return
    x, y = world.vehicle.pos.x, world.vehicle.pos.y
    remaining = speed * dt
    leg = world.route_leg
    for _ in range(len(route) + 1):
        tx, ty = route[leg]
        seg = math.hypot(tx - x, ty - y)
        if seg > remaining:
            x += (tx - x) / seg * remaining
            y += (ty - y) / seg * remaining
            remaining = 0.0
            break
        remaining -= seg
        x, y = tx, ty
        leg = (leg + 1) % len(route)
    world.vehicle.pos = Position(x, y, 0.0)
    world.route_leg = leg
    world.vehicle.velocity_mps = _leg_velocity(world)


def background_arrivals(world: WorldState) -> np.ndarray:
    """Per-RSU background cycle arrivals for the current slot.

    Updates world.background_walk in place. Drawn from a generator keyed by
    (seed, time_slot), so arrivals depend only on the seed and the slot.
    """
    sc = world.scenario
    bg = sc.background
    n = sc.num_rsus
    rates = np.full(n, bg.base_rate_cps, dtype=np.float64)
    for h in bg.hotspot_nodes:
        rates[h] += bg.hotspot_rate_cps
    if bg.walk_sigma_cps > 0:
        rng = np.random.default_rng([world.rng_seed, world.time_slot])
        steps = rng.standard_normal(n) * bg.walk_sigma_cps
        world.background_walk = np.clip(
            world.background_walk + steps, -bg.walk_bound_cps, bg.walk_bound_cps
        )
    rates = np.maximum(rates + world.background_walk, 0.0)
    return rates * sc.dt_s


def step_world(world: WorldState, assignments: dict[int, float] | None = None) -> WorldState:
    """Advance one slot and return the successor state (input untouched).

    ``assignments`` maps node id to GPU cycles offloaded this slot. Order
    within the slot: drain, then arrivals (assigned + background), then the
    vehicle moves and the serving node is re-selected.
    """
    if world.done:
        raise EpisodeOver(f"time horizon t_max={world.scenario.t_max} reached")
    new = world.copy()
    sc = new.scenario
    dt = sc.dt_s

    arrivals = background_arrivals(new)
    for node in new.nodes:
        load = max(0.0, node.workload_cycles - node.compute_cps * dt)
        load += (assignments or {}).get(node.id, 0.0)
        if node.is_rsu:
            load += arrivals[node.id]
            cap = node.workload_max * sc.rsu.workload_cap_frac
        else:
            cap = node.workload_max
        node.workload_cycles = min(load, cap)

    _advance_vehicle(new, dt)
    new.time_slot += 1
    new.serving_node = select_serving_node(new)
    return new
