"""Service-latency model for split task processing with pre-migration.

A task of D bits is split between the serving node (D - Dm bits) and a
pre-migration node (Dm bits). Both queues start working at the same time,
so the processing stage finishes after

    max(serving processing, pre-migration processing + transfer),

and the end-to-end latency adds the uplink and the result downlink.
"""

from __future__ import annotations

from dataclasses import dataclass

from twinmig.simcore.channel import downlink_latency
from twinmig.simcore.nodes import EdgeNode, VehicleState


@dataclass(frozen=True)
class TaskSpec:
    """One slot's twin task: input size, result size, and pre-migrated share."""

    task_size_bits: float
    result_size_bits: float
    premigrated_bits: float = 0.0

    def __post_init__(self):
        if not 0 <= self.premigrated_bits < self.task_size_bits:
            raise ValueError(
                f"premigrated_bits must lie in [0, task_size_bits), got "
                f"{self.premigrated_bits} of {self.task_size_bits}"
            )
        if self.result_size_bits < 0:
            raise ValueError("result_size_bits must be nonnegative")

    def with_ratio(self, alpha: float) -> "TaskSpec":
        """Copy of this task with premigrated_bits = alpha * task_size_bits."""
        if not 0 <= alpha < 1:
            raise ValueError(f"pre-migration ratio must lie in [0, 1), got {alpha}")
        return TaskSpec(self.task_size_bits, self.result_size_bits,
                        alpha * self.task_size_bits)


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-stage latencies of one service round, all in seconds."""

    uplink_s: float
    proc_serving_s: float
    proc_premig_s: float
    migrate_s: float
    proc_total_s: float
    downlink_s: float
    total_s: float


def migration_latency(task: TaskSpec, src: EdgeNode) -> float:
    """Seconds to push the pre-migrated share over the source backhaul."""
    if task.premigrated_bits == 0:
        return 0.0
    return task.premigrated_bits / src.inter_node_bandwidth_bps


def processing_latency(node: EdgeNode, bits_assigned: float, veh: VehicleState) -> float:
    """Seconds from arrival to completion of ``bits_assigned`` at ``node``.

    Counts the node's queued cycles plus the task's own demand:
    (workload + bits * cycles_per_bit) / compute.
    """
    if bits_assigned < 0:
        raise ValueError("bits_assigned must be nonnegative")
    cycles = node.workload_cycles + bits_assigned * veh.cycles_per_bit
    return cycles / node.compute_cps


def total_latency(
    task: TaskSpec,
    serving: EdgeNode,
    premig: EdgeNode,
    veh: VehicleState,
    uplink_s: float = 0.0,
) -> LatencyBreakdown:
    """End-to-end latency of one service round with the given split.

    The serving node processes task_size - premigrated bits and returns the
    result over its downlink; the pre-migration node processes the rest after
    the backhaul transfer completes.
    """
    if uplink_s < 0:
        raise ValueError("uplink_s must be nonnegative")
    if task.premigrated_bits > 0 and serving.id == premig.id:
        raise ValueError("pre-migration target must differ from the serving node")

    proc_serving = processing_latency(serving, task.task_size_bits - task.premigrated_bits, veh)
    proc_premig = processing_latency(premig, task.premigrated_bits, veh)
    migrate = migration_latency(task, serving)
    proc_total = max(proc_serving, proc_premig + migrate)
    downlink = downlink_latency(task, serving, veh)
    return LatencyBreakdown(
        uplink_s=uplink_s,
        proc_serving_s=proc_serving,
        proc_premig_s=proc_premig,
        migrate_s=migrate,
        proc_total_s=proc_total,
        downlink_s=downlink,
        total_s=uplink_s + proc_total + downlink,
    )
