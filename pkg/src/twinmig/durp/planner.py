"""A*-based UAV route planning toward the busiest RSU.

The planner re-selects its goal every slot (the highest-workload RSU, with a
small hysteresis against thrash), searches the waypoint graph, advances one
edge, and pays move plus hover energy. The heuristic combines distance to
goal, an energy term, and the node's load:

    h(n) = w_dist * d(n, goal) + w_energy * E(n) + w_load * load(n)

where E(n) is the expected move expenditure to the goal by default, or the
UAV's remaining battery charge verbatim when ``use_remaining_energy`` is set
(strict mode). A negative w_load makes loaded nodes attract the path.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable

from twinmig.durp.graph import RoutingGraph
from twinmig.simcore.nodes import EdgeNode
from twinmig.simcore.geometry import Position, ground_distance


@dataclass(frozen=True)
class HeuristicWeights:
    w_dist: float = 0.0
    w_energy: float = 1.0
    w_load: float = -500.0

    def __post_init__(self):
        for name in ("w_dist", "w_energy", "w_load"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass
class EnergyModel:
    hover_power_w: float = 100.0
    move_energy_per_m: float = 2.0
    battery_j: float = 5.0e6

    def __post_init__(self):
        if self.hover_power_w < 0 or self.move_energy_per_m < 0 or self.battery_j < 0:
            raise ValueError("energy parameters must be nonnegative")


@dataclass(frozen=True)
class RoutePlan:
    path: list[int]
    path_cost_g: float
    expansions: int


@dataclass(frozen=True)
class TraceRow:
    """One slot of the mission: how far the UAV flew and how long it hovered."""

    step: int
    node_id: int
    goal_id: int
    moved_m: float
    hover_s: float
    path_len: int
    battery_j: float


@dataclass
class UavPlannerState:
    node_id: int
    energy: EnergyModel
    weights: HeuristicWeights = field(default_factory=HeuristicWeights)
    use_remaining_energy: bool = False
    goal_hysteresis: float = 1.0
    goal_id: int | None = None
    grounded: bool = False
    step_count: int = 0
    trace: list[TraceRow] = field(default_factory=list)
    last_plan: RoutePlan | None = None


def select_goal(nodes: Iterable[EdgeNode]) -> int:
    """Id of the RSU with the highest workload; ties go to the lowest id."""
    best: tuple[float, int] | None = None
    for node in nodes:
        if not node.is_rsu:
            continue
        key = (-node.workload_cycles, node.id)
        if best is None or key < best:
            best = key
    if best is None:
        raise ValueError("no RSU nodes to select a goal from")
    return best[1]


def heuristic(
    n: int,
    goal: int,
    graph: RoutingGraph,
    energy: EnergyModel,
    weights: HeuristicWeights,
    use_remaining_energy: bool = False,
) -> float:
    """Estimated remaining cost from node ``n`` to ``goal``."""
    if n not in graph or goal not in graph:
        raise ValueError("heuristic nodes must belong to the graph")
    d = graph.straight_distance(n, goal)
    if use_remaining_energy:
        energy_term = weights.w_energy * energy.battery_j
    else:
        energy_term = weights.w_energy * energy.move_energy_per_m * d
    return weights.w_dist * d + energy_term + weights.w_load * graph.nodes[n].load


def astar_search(
    graph: RoutingGraph,
    start: int,
    goal: int,
    energy: EnergyModel,
    weights: HeuristicWeights,
    use_remaining_energy: bool = False,
) -> RoutePlan | None:
    """Best-first search on f = g + h; returns None when goal is unreachable.

    Ties on f break on smaller h, then smaller node id. Closed nodes are
    re-opened when a cheaper g is found, and the search only stops once no
    open f-bound can beat the best goal cost (the load term can make h
    negative at the goal, so terminating on the first goal pop would be
    unsound). Any admissible heuristic therefore yields the exact shortest
    path; with a consistent one every node is expanded at most once.
    """
    if start not in graph or goal not in graph:
        raise ValueError("start and goal must belong to the graph")

    def h(nid: int) -> float:
        return heuristic(nid, goal, graph, energy, weights, use_remaining_energy)

    g = {start: 0.0}
    parent: dict[int, int] = {}
    h_start = h(start)
    open_heap: list[tuple[float, float, int]] = [(h_start, h_start, start)]
    closed: set[int] = set()
    expansions = 0
    best_goal_cost = math.inf

    while open_heap:
        f, _, nid = heapq.heappop(open_heap)
        if f >= best_goal_cost:
            break  # f is a lower bound on any completion through nid
        if nid in closed or f > g[nid] + h(nid) + 1e-12:
            continue  # stale entry
        closed.add(nid)
        expansions += 1
        if nid == goal:
            best_goal_cost = g[nid]
            continue
        for m, w in graph.neighbors(nid):
            ng = g[nid] + w
            if m not in g or ng < g[m]:
                g[m] = ng
                parent[m] = nid
                closed.discard(m)
                hm = h(m)
                heapq.heappush(open_heap, (ng + hm, hm, m))

    if math.isinf(best_goal_cost):
        return None
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    return RoutePlan(path=path, path_cost_g=g[goal], expansions=expansions)


def plan_and_step(
    planner: UavPlannerState,
    graph: RoutingGraph,
    dt_s: float = 1.0,
) -> Position:
    """Re-select the goal, re-plan, advance one edge, and charge energy.

    At the goal (or with no usable path) the UAV hovers in place. The slot is
    skipped entirely, with no energy draw, once the battery cannot cover it;
    the UAV is then grounded for the rest of the mission.
    """
    planner.step_count += 1
    pos = graph.nodes[planner.node_id].pos
    if planner.grounded:
        return pos

    loads = {nid: node.load for nid, node in graph.nodes.items()}
    top = max(sorted(loads), key=lambda nid: (loads[nid], -nid))
    if planner.goal_id is None or planner.goal_id not in graph:
        planner.goal_id = top
    elif loads[top] > loads[planner.goal_id] + planner.goal_hysteresis:
        planner.goal_id = top

    plan = astar_search(graph, planner.node_id, planner.goal_id, planner.energy,
                        planner.weights, planner.use_remaining_energy)
    planner.last_plan = plan

    moved_m = 0.0
    next_id = planner.node_id
    if plan is not None and len(plan.path) >= 2:
        next_id = plan.path[1]
        moved_m = graph.straight_distance(planner.node_id, next_id)

    hover_s = dt_s
    cost = moved_m * planner.energy.move_energy_per_m + hover_s * planner.energy.hover_power_w
    if cost > planner.energy.battery_j:
        planner.grounded = True
        return pos

    planner.energy.battery_j -= cost
    planner.node_id = next_id
    planner.trace.append(TraceRow(
        step=planner.step_count,
        node_id=next_id,
        goal_id=planner.goal_id,
        moved_m=moved_m,
        hover_s=hover_s,
        path_len=len(plan.path) if plan is not None else 1,
        battery_j=planner.energy.battery_j,
    ))
    return graph.nodes[next_id].pos


def absorb_workload(
    uav: EdgeNode,
    nodes: Iterable[EdgeNode],
    absorb_rate: float,
    overload_threshold_frac: float = 0.7,
    assist_radius_m: float = 500.0,
) -> float:
    """Shift overload cycles from in-range RSUs onto the UAV, in id order.

    Each RSU hands over absorb_rate * min(load above the soft threshold,
    UAV spare capacity). Nodes are mutated in place; returns total cycles
    moved. The pairwise subtract/add keeps the system total conserved up to
    one rounding step per transfer.
    """
    if not 0 <= absorb_rate <= 1:
        raise ValueError("absorb_rate must lie in [0, 1]")
    moved_total = 0.0
    if absorb_rate == 0:
        return moved_total
    for node in sorted((n for n in nodes if n.is_rsu), key=lambda n: n.id):
        if ground_distance(node.pos, uav.pos) > assist_radius_m:
            continue
        excess = node.workload_cycles - overload_threshold_frac * node.workload_max
        spare = uav.workload_max - uav.workload_cycles
        moved = absorb_rate * min(excess, spare)
        if moved <= 0:
            continue
        node.workload_cycles -= moved
        uav.workload_cycles += moved
        moved_total += moved
    return moved_total


def mission_energy(trace: Iterable[TraceRow], energy: EnergyModel) -> float:
    """Total joules of a mission trace: move energy plus hover energy.

    Summed in trace order with the same per-row arithmetic used when the
    battery was charged, so it matches initial minus final battery.
    """
    total = 0.0
    for row in trace:
        total += row.moved_m * energy.move_energy_per_m + row.hover_s * energy.hover_power_w
    return total
