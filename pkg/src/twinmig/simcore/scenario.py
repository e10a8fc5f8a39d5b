"""Scenario configuration: topology, radio constants, workloads, mobility.

A scenario fully determines a world up to the seed. Files are YAML with the
same nesting as the dataclasses below; unknown keys are rejected so typos
fail loudly. Presets cover the standard 16-RSU grid, a 2-RSU overload toy,
and the 16-RSU routing study.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml


class ScenarioError(ValueError):
    """Malformed scenario data (unknown key, bad type, bad value)."""


@dataclass
class GridSpec:
    nx: int = 4
    ny: int = 4
    spacing_m: float = 500.0
    coverage_radius_m: float = 400.0


@dataclass
class ChannelSpec:
    gain_a: float = 1.0
    light_speed_mps: float = 3.0e8
    carrier_freq_hz: float = 2.4e9
    noise_power_w: float = 1.0e-13
    downlink_bandwidth_hz: float = 1.0e7


@dataclass
class RsuSpec:
    compute_cps: float = 6.0e10
    workload_max: float = 3.0e11
    # scalar for all RSUs, or one value per RSU id
    initial_workload: float | list[float] = 0.0
    inter_node_bandwidth_bps: float = 1.0e9
    # physical queue saturates at this multiple of workload_max (admission control)
    workload_cap_frac: float = 1.25

    def initial_workload_of(self, node_id: int, num_rsus: int) -> float:
        if isinstance(self.initial_workload, (int, float)):
            return float(self.initial_workload)
        if len(self.initial_workload) != num_rsus:
            raise ScenarioError(
                f"rsu.initial_workload needs {num_rsus} entries, got {len(self.initial_workload)}"
            )
        return float(self.initial_workload[node_id])


@dataclass
class UavSpec:
    count: int = 1
    altitude_m: float = 100.0
    compute_cps: float = 3.0e10
    workload_max: float = 1.5e11
    inter_node_bandwidth_bps: float = 1.0e9
    start_node: int = 0
    battery_j: float = 5.0e6
    hover_power_w: float = 100.0
    move_energy_per_m: float = 2.0
    assist_radius_m: float = 500.0
    absorb_rate: float = 0.5
    overload_threshold_frac: float = 0.7


@dataclass
class VehicleSpec:
    speed_mps: float = 15.0
    transmit_power_w: float = 0.1
    cycles_per_bit: float = 200.0
    # loop of (x, y) waypoints in meters; None = perimeter of the RSU grid
    route: list[tuple[float, float]] | None = None


@dataclass
class TaskSizeSpec:
    size_bits: float = 1.0e8
    result_bits: float = 1.0e7


@dataclass
class BackgroundSpec:
    """Per-node arrival process: base + hotspot offset + bounded random walk."""

    base_rate_cps: float = 1.0e10
    hotspot_nodes: list[int] = field(default_factory=lambda: [5, 6, 9, 10])
    hotspot_rate_cps: float = 3.0e10
    walk_sigma_cps: float = 5.0e9
    walk_bound_cps: float = 1.5e10


@dataclass
class Scenario:
    grid: GridSpec = field(default_factory=GridSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    rsu: RsuSpec = field(default_factory=RsuSpec)
    uav: UavSpec = field(default_factory=UavSpec)
    vehicle: VehicleSpec = field(default_factory=VehicleSpec)
    task: TaskSizeSpec = field(default_factory=TaskSizeSpec)
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    uplink_latency_s: float = 0.0
    dt_s: float = 1.0
    t_max: int = 1000

    @property
    def num_rsus(self) -> int:
        return self.grid.nx * self.grid.ny

    @property
    def num_nodes(self) -> int:
        return self.num_rsus + self.uav.count

    def extent_m(self) -> tuple[float, float]:
        """(x, y) span of the RSU grid, used for observation normalization."""
        return (
            max(1.0, (self.grid.nx - 1) * self.grid.spacing_m),
            max(1.0, (self.grid.ny - 1) * self.grid.spacing_m),
        )

    def rsu_position(self, node_id: int) -> tuple[float, float]:
        """Row-major grid placement of RSU ``node_id``."""
        if not 0 <= node_id < self.num_rsus:
            raise ScenarioError(f"RSU id {node_id} out of range")
        row, col = divmod(node_id, self.grid.nx)
        return col * self.grid.spacing_m, row * self.grid.spacing_m

    def default_route(self) -> list[tuple[float, float]]:
        """Counter-clockwise loop around the grid perimeter, inset so the
        road never passes exactly through an RSU position."""
        inset = min(10.0, self.grid.spacing_m / 4.0)
        w, h = self.extent_m()
        return [(inset, inset), (max(w - inset, inset), inset),
                (max(w - inset, inset), max(h - inset, inset)), (inset, max(h - inset, inset))]

    def validate(self) -> None:
        if self.grid.nx < 1 or self.grid.ny < 1:
            raise ScenarioError("grid dimensions must be at least 1x1")
        if self.t_max < 1:
            raise ScenarioError("t_max must be at least 1")
        if self.dt_s <= 0:
            raise ScenarioError("dt_s must be positive")
        if self.uplink_latency_s < 0:
            raise ScenarioError("uplink_latency_s must be nonnegative")
        if not 0 <= self.uav.absorb_rate <= 1:
            raise ScenarioError("uav.absorb_rate must lie in [0, 1]")
        if self.uav.count and not 0 <= self.uav.start_node < self.num_rsus:
            raise ScenarioError("uav.start_node must name an RSU")
        for n in self.background.hotspot_nodes:
            if not 0 <= n < self.num_rsus:
                raise ScenarioError(f"hotspot node {n} is not an RSU id")


def _from_dict(cls, data: Any, path: str):
    """Build dataclass ``cls`` from a mapping, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ScenarioError(f"{path or 'scenario'}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        key = sorted(unknown)[0]
        raise ScenarioError(f"unknown key '{path + '.' if path else ''}{key}'")
    kwargs = {}
    for name, value in data.items():
        f = fields[name]
        sub = f"{path}.{name}" if path else name
        if f.type in _NESTED:
            kwargs[name] = _from_dict(_NESTED[f.type], value, sub)
        elif name == "route" and value is not None:
            kwargs[name] = [tuple(float(c) for c in wp) for wp in value]
        else:
            kwargs[name] = value
    return cls(**kwargs)


_NESTED = {
    "GridSpec": GridSpec,
    "ChannelSpec": ChannelSpec,
    "RsuSpec": RsuSpec,
    "UavSpec": UavSpec,
    "VehicleSpec": VehicleSpec,
    "TaskSizeSpec": TaskSizeSpec,
    "BackgroundSpec": BackgroundSpec,
    "Scenario": Scenario,
}


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a nested mapping and build a Scenario (presets supported).

    A ``preset`` key selects one of PRESETS; the remaining keys override
    individual fields of the preset.
    """
    data = dict(data or {})
    preset = data.pop("preset", None)
    base = preset_scenario(preset) if preset else Scenario()
    if not data:
        scenario = base
    else:
        merged = _merge(dataclasses.asdict(base), data)
        scenario = _from_dict(Scenario, merged, "")
    scenario.validate()
    return scenario


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def scenario_to_dict(scenario: Scenario) -> dict:
    out = dataclasses.asdict(scenario)
    route = out["vehicle"].get("route")
    if route is not None:
        out["vehicle"]["route"] = [list(wp) for wp in route]  # YAML-safe
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a YAML scenario file."""
    raw = yaml.safe_load(Path(path).read_text())
    if raw is None:
        raw = {}
    return scenario_from_dict(raw)


def preset_scenario(name: str) -> Scenario:
    """Named scenario presets used by the bundled experiments."""
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ScenarioError(
            f"unknown scenario preset '{name}', expected one of {sorted(_PRESETS)}"
        ) from None


def _preset_default_16rsu() -> Scenario:
    return Scenario()


def _preset_toy_2rsu_overload() -> Scenario:
    """Two RSUs: the serving one carries a persistent backlog, the other idles.

    Pre-migrating a large share of the task to the idle RSU is strictly
    better at every ratio step, which makes learning progress measurable.
    """
    return Scenario(
        grid=GridSpec(nx=2, ny=1, spacing_m=400.0, coverage_radius_m=450.0),
        rsu=RsuSpec(
            compute_cps=6.0e10,
            workload_max=3.0e11,
            initial_workload=[6.0e10, 0.0],
            inter_node_bandwidth_bps=1.0e9,
        ),
        uav=UavSpec(count=0),
        vehicle=VehicleSpec(speed_mps=0.0, route=[(50.0, 0.0)]),
        task=TaskSizeSpec(size_bits=1.0e8, result_bits=1.0e7),
        background=BackgroundSpec(
            base_rate_cps=0.0,
            hotspot_nodes=[0],
            hotspot_rate_cps=4.0e10,
            walk_sigma_cps=0.0,
            walk_bound_cps=0.0,
        ),
        t_max=40,
    )


def _preset_route_16rsu() -> Scenario:
    """16-RSU routing study: three persistent hotspots, no vehicle traffic."""
    return Scenario(
        rsu=RsuSpec(
            compute_cps=6.0e10,
            workload_max=3.0e11,
            initial_workload=0.0,
            inter_node_bandwidth_bps=1.0e9,
        ),
        uav=UavSpec(
            count=1,
            compute_cps=3.0e10,
            workload_max=4.0e11,
            start_node=0,
            battery_j=1.0e7,
            hover_power_w=100.0,
            move_energy_per_m=2.0,
            assist_radius_m=500.0,
            absorb_rate=0.5,
            overload_threshold_frac=0.3,
        ),
        vehicle=VehicleSpec(speed_mps=0.0, route=[(0.0, 0.0)]),
        background=BackgroundSpec(
            base_rate_cps=1.0e10,
            hotspot_nodes=[5, 10, 15],
            hotspot_rate_cps=5.5e10,
            walk_sigma_cps=4.0e9,
            walk_bound_cps=1.2e10,
        ),
        t_max=1000,
    )


_PRESETS = {
    "default-16rsu": _preset_default_16rsu,
    "toy-2rsu-overload": _preset_toy_2rsu_overload,
    "route-16rsu": _preset_route_16rsu,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)
