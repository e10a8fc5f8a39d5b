"""Edge nodes (RSUs and UAVs) and the vehicular user."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from twinmig.simcore.channel import ChannelParams
from twinmig.simcore.geometry import Position


class NodeKind(str, Enum):
    RSU = "rsu"
    UAV = "uav"


@dataclass
class EdgeNode:
    """An edge server with GPU compute, a pending-cycle queue, and radio links.

    workload_cycles is the queue of GPU cycles waiting at the node; it is
    drained by compute_cps every slot and bounded below by zero.
    """

    id: int
    kind: NodeKind
    pos: Position
    compute_cps: float                    # GPU cycles per second
    workload_max: float                   # soft capacity bound in cycles
    inter_node_bandwidth_bps: float       # backhaul to peer nodes
    coverage_radius_m: float
    workload_cycles: float = 0.0
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.compute_cps <= 0:
            raise ValueError("compute_cps must be positive")
        if self.workload_max <= 0:
            raise ValueError("workload_max must be positive")
        if self.inter_node_bandwidth_bps <= 0:
            raise ValueError("inter_node_bandwidth_bps must be positive")
        if self.workload_cycles < 0:
            raise ValueError("workload_cycles must be nonnegative")

    @property
    def is_rsu(self) -> bool:
        return self.kind is NodeKind.RSU

    @property
    def is_uav(self) -> bool:
        return self.kind is NodeKind.UAV


@dataclass
class VehicleState:
    """The vehicular user whose twin tasks are offloaded to edge nodes."""

    pos: Position
    velocity_mps: tuple[float, float] = (0.0, 0.0)
    transmit_power_w: float = 0.1
    cycles_per_bit: float = 200.0

    def __post_init__(self):
        if self.transmit_power_w <= 0:
            raise ValueError("transmit_power_w must be positive")
        if self.cycles_per_bit <= 0:
            raise ValueError("cycles_per_bit must be positive")
