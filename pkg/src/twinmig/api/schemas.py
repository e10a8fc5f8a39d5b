"""Pydantic request/response models of the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ChannelModel(BaseModel):
    gain_a: float = 1.0
    light_speed_mps: float = 3.0e8
    carrier_freq_hz: float = 2.4e9
    noise_power_w: float = 1.0e-13
    downlink_bandwidth_hz: float = 1.0e7


class NodeModel(BaseModel):
    id: int = 0
    kind: Literal["rsu", "uav"] = "rsu"
    x_m: float = 0.0
    y_m: float = 0.0
    z_m: float = 0.0
    compute_cps: float = Field(6.0e10, gt=0)
    workload_cycles: float = Field(0.0, ge=0)
    workload_max: float = Field(3.0e11, gt=0)
    inter_node_bandwidth_bps: float = Field(1.0e9, gt=0)
    coverage_radius_m: float = Field(400.0, gt=0)
    channel: ChannelModel = Field(default_factory=ChannelModel)


class VehicleModel(BaseModel):
    x_m: float = 0.0
    y_m: float = 0.0
    transmit_power_w: float = Field(0.1, gt=0)
    cycles_per_bit: float = Field(200.0, gt=0)


class TaskModel(BaseModel):
    task_size_bits: float = Field(1.0e8, gt=0)
    result_size_bits: float = Field(1.0e7, ge=0)
    premigrate_ratio: float = Field(0.0, ge=0.0, lt=1.0)


class LatencyRequest(BaseModel):
    serving: NodeModel
    premig: Optional[NodeModel] = None
    vehicle: VehicleModel = Field(default_factory=VehicleModel)
    task: TaskModel = Field(default_factory=TaskModel)
    uplink_s: float = Field(0.0, ge=0)


class LatencyResponse(BaseModel):
    uplink_s: float
    proc_serving_s: float
    proc_premig_s: float
    migrate_s: float
    proc_total_s: float
    downlink_s: float
    total_s: float


class PresetsResponse(BaseModel):
    presets: list[str]


class RunRequest(BaseModel):
    """Submit an experiment; config uses the same schema as the YAML files."""

    config: dict = Field(default_factory=dict)
    wait: bool = False


class RunInfo(BaseModel):
    job_id: str
    run_id: str
    mode: str
    state: Literal["queued", "running", "completed", "failed"]
    out_dir: Optional[str] = None
    error: Optional[str] = None
    summary: Optional[dict] = None


class RunListResponse(BaseModel):
    runs: list[RunInfo]


class MetricRow(BaseModel):
    run_id: str
    seed: int
    step: int
    metric: str
    value: float
    units: str


class MetricsResponse(BaseModel):
    job_id: str
    records: list[MetricRow]
