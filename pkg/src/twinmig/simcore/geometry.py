"""3-D positions for ground and aerial nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Position:
    """A point in meters. Ground nodes sit at z = 0, UAVs at their altitude."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"position coordinates must be finite, got {self}")


def distance(a: Position, b: Position) -> float:
    """Euclidean distance in meters, including the altitude difference."""
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


def ground_distance(a: Position, b: Position) -> float:
    """Horizontal distance in meters; coverage footprints ignore altitude."""
    return math.hypot(a.x - b.x, a.y - b.y)
