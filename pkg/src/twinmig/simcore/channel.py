"""Downlink wireless channel: inverse-square path gain and Shannon rate.

The mean channel gain follows h = A * (c / (4*pi*f*d))^2 and the downlink
rate is R = B * log2(1 + p*h / sigma^2). Distances below ``MIN_DISTANCE_M``
are clamped to keep the 1/d^2 gain finite in the near field.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from twinmig.simcore.latency import TaskSpec
    from twinmig.simcore.nodes import EdgeNode, VehicleState

log = logging.getLogger(__name__)

# Near-field clamp: gains are evaluated at max(d, MIN_DISTANCE_M).
MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget constants of a node's downlink."""

    channel_gain_a: float = 1.0
    light_speed_mps: float = 3.0e8
    carrier_freq_hz: float = 2.4e9
    noise_power_w: float = 1.0e-13
    downlink_bandwidth_hz: float = 1.0e7

    def __post_init__(self):
        for name in ("channel_gain_a", "light_speed_mps", "carrier_freq_hz",
                     "noise_power_w", "downlink_bandwidth_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"ChannelParams.{name} must be strictly positive")


def channel_gain(params: ChannelParams, d: float) -> float:
    """Mean path gain at distance ``d`` meters (dimensionless, > 0).

    Raises ValueError for d <= 0; distances in (0, MIN_DISTANCE_M) are
    clamped to MIN_DISTANCE_M.
    """
    if d <= 0:
        raise ValueError(f"channel distance must be positive, got {d}")
    d = max(d, MIN_DISTANCE_M)
    wave = params.light_speed_mps / (4.0 * math.pi * params.carrier_freq_hz * d)
    return params.channel_gain_a * wave * wave


def downlink_rate(node: "EdgeNode", veh: "VehicleState") -> float:
    """Shannon downlink rate in bits/s between ``node`` and the vehicle."""
    from twinmig.simcore.geometry import distance

    d = distance(node.pos, veh.pos)
    if d <= 0:
        raise ValueError("downlink rate undefined at zero distance")
    gain = channel_gain(node.channel, d)
    snr = veh.transmit_power_w * gain / node.channel.noise_power_w
    return node.channel.downlink_bandwidth_hz * math.log2(1.0 + snr)


def downlink_latency(task: "TaskSpec", node: "EdgeNode", veh: "VehicleState") -> float:
    """Seconds to deliver the task result over the serving downlink.

    A zero rate yields an infinite-latency sentinel rather than an exception.
    """
    rate = downlink_rate(node, veh)
    if task.result_size_bits == 0:
        return 0.0
    if rate == 0.0:
        log.warning("downlink rate is zero for node %s; latency is infinite", node.id)
        return math.inf
    return task.result_size_bits / rate
