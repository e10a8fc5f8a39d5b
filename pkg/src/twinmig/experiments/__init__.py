"""Experiment control plane: configuration, baseline agents, seeded
end-to-end runs, and metric emission."""

from twinmig.experiments.config import (
    ConfigError,
    DurpSpec,
    EnvSpec,
    EvalSpec,
    ExperimentConfig,
    RouteSpec,
    config_hash,
    config_to_dict,
    load_config,
)
from twinmig.experiments.metrics import MetricsRecord, RunSummary, emit_metrics, summarize_records
from twinmig.experiments.runner import (
    run,
    run_training,
    run_eval,
    run_baseline,
    run_route_study,
    run_sweep,
)

__all__ = [
    "ConfigError",
    "DurpSpec",
    "EnvSpec",
    "EvalSpec",
    "ExperimentConfig",
    "RouteSpec",
    "config_hash",
    "config_to_dict",
    "load_config",
    "MetricsRecord",
    "RunSummary",
    "emit_metrics",
    "summarize_records",
    "run",
    "run_training",
    "run_eval",
    "run_baseline",
    "run_route_study",
    "run_sweep",
]
