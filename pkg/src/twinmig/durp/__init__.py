"""Dynamic UAV routing: A* search over the RSU waypoint graph with a
load-aware heuristic, goal re-selection toward the busiest RSU, and
workload absorption by the hovering UAV."""

from twinmig.durp.graph import GraphNode, RoutingGraph
from twinmig.durp.planner import (
    EnergyModel,
    HeuristicWeights,
    RoutePlan,
    TraceRow,
    UavPlannerState,
    select_goal,
    heuristic,
    astar_search,
    plan_and_step,
    absorb_workload,
    mission_energy,
)
from twinmig.durp.controllers import (
    UavController,
    DurpController,
    RandomWalkController,
    StaticHoverController,
    GreedyHotspotController,
    make_controller,
    CONTROLLER_NAMES,
)

__all__ = [
    "GraphNode",
    "RoutingGraph",
    "EnergyModel",
    "HeuristicWeights",
    "RoutePlan",
    "TraceRow",
    "UavPlannerState",
    "select_goal",
    "heuristic",
    "astar_search",
    "plan_and_step",
    "absorb_workload",
    "mission_energy",
    "UavController",
    "DurpController",
    "RandomWalkController",
    "StaticHoverController",
    "GreedyHotspotController",
    "make_controller",
    "CONTROLLER_NAMES",
]
