"""Slot-by-slot UAV controllers: the DURP planner and its baselines.

Every controller moves one UAV over the RSU waypoint graph, pays the same
move/hover energy, and lets the UAV absorb overload from RSUs in range.
They differ only in how the next waypoint is chosen.
"""

from __future__ import annotations

import numpy as np

from twinmig.durp.graph import RoutingGraph
from twinmig.durp.planner import (
    EnergyModel,
    HeuristicWeights,
    TraceRow,
    UavPlannerState,
    absorb_workload,
    plan_and_step,
)
from twinmig.simcore.geometry import Position
from twinmig.simcore.scenario import Scenario
from twinmig.simcore.world import WorldState


class UavController:
    """Base controller: energy accounting, absorption, and graph upkeep."""

    name = "base"

    def __init__(self, scenario: Scenario, uav_node_id: int,
                 weights: HeuristicWeights | None = None,
                 strict_paper: bool = False,
                 goal_hysteresis: float = 1.0):
        self.scenario = scenario
        self.uav_node_id = uav_node_id
        self.energy = EnergyModel(
            hover_power_w=scenario.uav.hover_power_w,
            move_energy_per_m=scenario.uav.move_energy_per_m,
            battery_j=scenario.uav.battery_j,
        )
        self.initial_battery_j = scenario.uav.battery_j
        # the graph carries normalized loads (L / L_max), so the hysteresis,
        # given in cycles, is rescaled to the same units
        self.planner = UavPlannerState(
            node_id=scenario.uav.start_node,
            energy=self.energy,
            weights=weights or HeuristicWeights(),
            use_remaining_energy=strict_paper,
            goal_hysteresis=goal_hysteresis / scenario.rsu.workload_max,
        )
        self._graph: RoutingGraph | None = None

    # -- graph ---------------------------------------------------------------

    def graph_for(self, world: WorldState) -> RoutingGraph:
        """Waypoint graph with current normalized loads (adjacency is static)."""
        if self._graph is None:
            self._graph = RoutingGraph.rsu_grid(
                world.rsus,
                move_energy_per_m=self.scenario.uav.move_energy_per_m,
                neighbor_radius_m=self.scenario.grid.spacing_m * 1.001,
            )
        self._graph.set_loads({
            r.id: r.workload_cycles / r.workload_max for r in world.rsus
        })
        return self._graph

    # -- per-slot control ----------------------------------------------------

    def choose_next(self, world: WorldState, graph: RoutingGraph,
                    rng: np.random.Generator) -> int:
        """Waypoint to fly to this slot (current node means hover)."""
        raise NotImplementedError

    def step(self, world: WorldState, slot: int) -> None:
        """Advance the UAV one slot in ``world`` (mutates the UAV node and RSUs)."""
        planner = self.planner
        planner.step_count += 1
        if planner.grounded:
            return
        graph = self.graph_for(world)
        rng = np.random.default_rng([world.rng_seed, slot, self.uav_node_id, 0xCAFE])
        next_id = self.choose_next(world, graph, rng)

        moved_m = 0.0 if next_id == planner.node_id else graph.straight_distance(planner.node_id, next_id)
        hover_s = self.scenario.dt_s
        cost = moved_m * self.energy.move_energy_per_m + hover_s * self.energy.hover_power_w
        if cost > self.energy.battery_j:
            planner.grounded = True
            return
        self.energy.battery_j -= cost
        planner.node_id = next_id
        planner.trace.append(TraceRow(
            step=planner.step_count,
            node_id=next_id,
            goal_id=planner.goal_id if planner.goal_id is not None else next_id,
            moved_m=moved_m,
            hover_s=hover_s,
            path_len=len(planner.last_plan.path) if planner.last_plan else 1,
            battery_j=self.energy.battery_j,
        ))
        self._settle(world)

    def _settle(self, world: WorldState) -> None:
        """Park the UAV node at its waypoint and absorb nearby overload."""
        uav = world.node(self.uav_node_id)
        wp = self.graph_for(world).nodes[self.planner.node_id].pos
        uav.pos = Position(wp.x, wp.y, self.scenario.uav.altitude_m)
        absorb_workload(
            uav,
            world.rsus,
            absorb_rate=self.scenario.uav.absorb_rate,
            overload_threshold_frac=self.scenario.uav.overload_threshold_frac,
            assist_radius_m=self.scenario.uav.assist_radius_m,
        )

    @property
    def battery_j(self) -> float:
        return self.energy.battery_j

    @property
    def trace(self) -> list[TraceRow]:
        return self.planner.trace


class DurpController(UavController):
    """Full planner: goal = busiest RSU, A* path, one edge per slot."""

    name = "durp"

    def step(self, world: WorldState, slot: int) -> None:
        if self.planner.grounded:
            self.planner.step_count += 1
            return
        graph = self.graph_for(world)
        plan_and_step(self.planner, graph, dt_s=self.scenario.dt_s)
        if not self.planner.grounded:
            self._settle(world)


class RandomWalkController(UavController):
    """Moves to a uniformly random neighbor every slot."""

    name = "random-walk"

    def choose_next(self, world, graph, rng):
        nbrs = [m for m, _ in graph.neighbors(self.planner.node_id)]
        if not nbrs:
            return self.planner.node_id
        return int(nbrs[rng.integers(len(nbrs))])


class StaticHoverController(UavController):
    """Never leaves its start waypoint."""

    name = "static-hover"

    def choose_next(self, world, graph, rng):
        return self.planner.node_id


class GreedyHotspotController(UavController):
    """Steps toward the nearest RSU whose load exceeds the soft threshold."""

    name = "greedy-hotspot"

    def choose_next(self, world, graph, rng):
        here = self.planner.node_id
        hot = [
            r.id for r in world.rsus
            if r.workload_cycles > self.scenario.uav.overload_threshold_frac * r.workload_max
        ]
        if not hot:
            return here
        target = min(hot, key=lambda nid: (graph.straight_distance(here, nid), nid))
        self.planner.goal_id = target
        if target == here:
            return here
        nbrs = [m for m, _ in graph.neighbors(here)]
        if not nbrs:
            return here
        return min(nbrs, key=lambda m: (graph.straight_distance(m, target), m))


CONTROLLER_NAMES = ("durp", "random-walk", "static-hover", "greedy-hotspot")


def make_controller(name: str, scenario: Scenario, uav_node_id: int,
                    weights: HeuristicWeights | None = None,
                    strict_paper: bool = False,
                    goal_hysteresis: float = 1.0) -> UavController:
    classes = {
        "durp": DurpController,
        "random-walk": RandomWalkController,
        "static-hover": StaticHoverController,
        "greedy-hotspot": GreedyHotspotController,
    }
    try:
        cls = classes[name]
    except KeyError:
        raise ValueError(f"unknown UAV controller '{name}', expected one of {CONTROLLER_NAMES}") from None
    return cls(scenario, uav_node_id, weights=weights, strict_paper=strict_paper,
               goal_hysteresis=goal_hysteresis)
