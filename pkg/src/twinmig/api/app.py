"""FastAPI application: a stateless latency calculator plus a small job
store that executes experiment runs and serves their metrics."""

from __future__ import annotations

import dataclasses
import itertools
import threading
import traceback

from fastapi import FastAPI, HTTPException

import twinmig
from twinmig.api import schemas
from twinmig.experiments.config import ConfigError, config_from_dict
from twinmig.experiments.metrics import parse_metrics_csv
from twinmig.experiments.runner import run as run_experiment
from twinmig.simcore.channel import ChannelParams
from twinmig.simcore.geometry import Position
from twinmig.simcore.latency import TaskSpec, total_latency
from twinmig.simcore.nodes import EdgeNode, NodeKind, VehicleState
from twinmig.simcore.scenario import preset_names


class Job:
    def __init__(self, job_id: str, cfg):
        self.job_id = job_id
        self.cfg = cfg
        self.state = "queued"
        self.error: str | None = None
        self.summary = None
        self.out_dir: str | None = None
        self.thread: threading.Thread | None = None

    def execute(self) -> None:
        self.state = "running"
        try:
            summary = run_experiment(self.cfg)
            self.summary = summary
            self.out_dir = self.cfg.out_dir
            self.state = "completed"
        except Exception as exc:  # surfaced through the API, not swallowed
            self.error = f"{type(exc).__name__}: {exc}"
            self.state = "failed"
            traceback.print_exc()

    def info(self) -> schemas.RunInfo:
        return schemas.RunInfo(
            job_id=self.job_id,
            run_id=self.summary.run_id if self.summary else (self.cfg.run_id or ""),
            mode=self.cfg.mode,
            state=self.state,
            out_dir=self.out_dir,
            error=self.error,
            summary=self.summary.to_document() if self.summary else None,
        )


class JobStore:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def submit(self, cfg, wait: bool) -> Job:
        with self._lock:
            job = Job(f"job-{next(self._counter)}", cfg)
            self._jobs[job.job_id] = job
        if wait:
            job.execute()
        else:
            job.thread = threading.Thread(target=job.execute, daemon=True)
            job.thread.start()
        return job

    def get(self, job_id: str) -> Job:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown job '{job_id}'") from None

    def all(self) -> list[Job]:
        return list(self._jobs.values())


def _node_from_model(m: schemas.NodeModel) -> EdgeNode:
    return EdgeNode(
        id=m.id,
        kind=NodeKind(m.kind),
        pos=Position(m.x_m, m.y_m, m.z_m),
        compute_cps=m.compute_cps,
        workload_max=m.workload_max,
        inter_node_bandwidth_bps=m.inter_node_bandwidth_bps,
        coverage_radius_m=m.coverage_radius_m,
        workload_cycles=m.workload_cycles,
        channel=ChannelParams(
            channel_gain_a=m.channel.gain_a,
            light_speed_mps=m.channel.light_speed_mps,
            carrier_freq_hz=m.channel.carrier_freq_hz,
            noise_power_w=m.channel.noise_power_w,
            downlink_bandwidth_hz=m.channel.downlink_bandwidth_hz,
        ),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="twinmig", version=twinmig.__version__)
    store = JobStore()

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=twinmig.__version__)

    @app.get("/presets", response_model=schemas.PresetsResponse)
    def presets():
        return schemas.PresetsResponse(presets=preset_names())

    @app.post("/latency", response_model=schemas.LatencyResponse)
    def latency(req: schemas.LatencyRequest):
        serving = _node_from_model(req.serving)
        premig = _node_from_model(req.premig) if req.premig is not None else serving
        if req.premig is None and req.task.premigrate_ratio > 0:
            raise HTTPException(status_code=422,
                                detail="premigrate_ratio > 0 requires a premig node")
        vehicle = VehicleState(
            pos=Position(req.vehicle.x_m, req.vehicle.y_m, 0.0),
            transmit_power_w=req.vehicle.transmit_power_w,
            cycles_per_bit=req.vehicle.cycles_per_bit,
        )
        task = TaskSpec(
            task_size_bits=req.task.task_size_bits,
            result_size_bits=req.task.result_size_bits,
            premigrated_bits=req.task.premigrate_ratio * req.task.task_size_bits,
        )
        try:
            lat = total_latency(task, serving, premig, vehicle, uplink_s=req.uplink_s)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return schemas.LatencyResponse(**dataclasses.asdict(lat))

    @app.post("/runs", response_model=schemas.RunInfo, status_code=202)
    def submit_run(req: schemas.RunRequest):
        try:
            cfg = config_from_dict(req.config)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        job = store.submit(cfg, wait=req.wait)
        return job.info()

    @app.get("/runs", response_model=schemas.RunListResponse)
    def list_runs():
        return schemas.RunListResponse(runs=[job.info() for job in store.all()])

    @app.get("/runs/{job_id}", response_model=schemas.RunInfo)
    def run_status(job_id: str):
        return store.get(job_id).info()

    @app.get("/runs/{job_id}/metrics", response_model=schemas.MetricsResponse)
    def run_metrics(job_id: str):
        job = store.get(job_id)
        if job.state != "completed" or job.summary is None:
            raise HTTPException(status_code=409, detail=f"job '{job_id}' is {job.state}")
        path = f"{job.cfg.out_dir}/{job.summary.run_id}/metrics.csv"
        records = parse_metrics_csv(path)
        return schemas.MetricsResponse(
            job_id=job_id,
            records=[schemas.MetricRow(**dataclasses.asdict(r)) for r in records],
        )

    return app
