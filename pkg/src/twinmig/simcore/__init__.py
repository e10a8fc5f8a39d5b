"""Deterministic world model: geometry, wireless channel, edge-node workloads,
vehicle mobility, and the service latency formulas."""

from twinmig.simcore.geometry import Position, distance
from twinmig.simcore.channel import ChannelParams, channel_gain, downlink_rate, downlink_latency
from twinmig.simcore.nodes import EdgeNode, NodeKind, VehicleState
from twinmig.simcore.latency import (
    TaskSpec,
    LatencyBreakdown,
    migration_latency,
    processing_latency,
    total_latency,
)
from twinmig.simcore.scenario import Scenario, load_scenario
from twinmig.simcore.world import WorldState, make_world, step_world, select_serving_node

__all__ = [
    "Position",
    "distance",
    "ChannelParams",
    "channel_gain",
    "downlink_rate",
    "downlink_latency",
    "EdgeNode",
    "NodeKind",
    "VehicleState",
    "TaskSpec",
    "LatencyBreakdown",
    "migration_latency",
    "processing_latency",
    "total_latency",
    "Scenario",
    "load_scenario",
    "WorldState",
    "make_world",
    "step_world",
    "select_serving_node",
]
