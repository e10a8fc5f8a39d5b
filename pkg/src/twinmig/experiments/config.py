"""Experiment configuration: YAML files, environment overrides, hashing.

Files mirror the dataclasses below; unknown keys are rejected with the full
key path. Any key can be overridden from the environment with the prefix
``TWINMIG_`` and ``__`` for nesting, e.g. ``TWINMIG_TRAINER__BATCH_SIZE=64``.
Values are parsed as YAML, so lists and nulls work.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from twinmig.durp.controllers import CONTROLLER_NAMES
from twinmig.rl.trainer import TrainerConfig
from twinmig.simcore.scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict, scenario_to_dict

ENV_PREFIX = "TWINMIG_"

RUN_MODES = ("train", "eval", "baseline", "route", "sweep")
BASELINE_KINDS = ("random", "greedy-nearest", "no-uav")
EVAL_POLICIES = ("checkpoint", "random", "greedy-nearest", "no-premig")


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass
class EnvSpec:
    """Decision-process knobs (see twinmig.mdp.EnvConfig)."""

    alpha_levels: int = 10
    penalty_weight: float = 1.0
    t_norm_s: float | None = None
    uav_targets: bool = True
    uav_target_radius_m: float | None = None
    target_mode: str = "joint"
    uav_mode: str = "durp"


@dataclass
class DurpSpec:
    w_dist: float = 0.0
    w_energy: float = 1.0
    w_load: float = -500.0
    goal_hysteresis: float = 1.0


@dataclass
class EvalSpec:
    episodes: int = 20
    policy: str = "greedy-nearest"
    checkpoint: str | None = None
    rsu_compute_sweep_cps: list[float] | None = None
    assist_modes: list[bool] = field(default_factory=lambda: [True])


@dataclass
class RouteSpec:
    algorithms: list[str] = field(default_factory=lambda: list(CONTROLLER_NAMES))


@dataclass
class ExperimentConfig:
    mode: str = "train"
    run_id: str | None = None
    out_dir: str = "runs"
    seeds: list[int] = field(default_factory=lambda: [0])
    strict_paper: bool = False
    baseline: str = "random"
    scenario: Scenario = field(default_factory=Scenario)
    env: EnvSpec = field(default_factory=EnvSpec)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    durp: DurpSpec = field(default_factory=DurpSpec)
    eval: EvalSpec = field(default_factory=EvalSpec)
    route: RouteSpec = field(default_factory=RouteSpec)

    def validate(self) -> None:
        if self.mode not in RUN_MODES:
            raise ConfigError(f"mode must be one of {RUN_MODES}, got '{self.mode}'")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.baseline not in BASELINE_KINDS:
            raise ConfigError(f"baseline must be one of {BASELINE_KINDS}, got '{self.baseline}'")
        if self.eval.policy not in EVAL_POLICIES:
            raise ConfigError(f"eval.policy must be one of {EVAL_POLICIES}, got '{self.eval.policy}'")
        if self.env.uav_mode not in ("none", *CONTROLLER_NAMES):
            raise ConfigError(f"env.uav_mode must be 'none' or one of {CONTROLLER_NAMES}")
        for alg in self.route.algorithms:
            if alg not in CONTROLLER_NAMES:
                raise ConfigError(f"route.algorithms entry '{alg}' not in {CONTROLLER_NAMES}")
        if self.eval.policy == "checkpoint" and self.eval.checkpoint is not None:
            if not Path(self.eval.checkpoint).exists():
                raise ConfigError(f"eval.checkpoint file not found: {self.eval.checkpoint}")
        self.scenario.validate()


_SECTION_TYPES = {
    "env": EnvSpec,
    "trainer": TrainerConfig,
    "durp": DurpSpec,
    "eval": EvalSpec,
    "route": RouteSpec,
}


def _build_section(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key '{path}.{unknown[0]}'")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a nested mapping."""
    if not isinstance(data, dict):
        raise ConfigError(f"config root: expected a mapping, got {type(data).__name__}")
    data = dict(data)
    kwargs = {}

    scenario_data = data.pop("scenario", None)
    if scenario_data is None:
        kwargs["scenario"] = Scenario()
    elif isinstance(scenario_data, dict):
        scenario_data = dict(scenario_data)
        file_ref = scenario_data.pop("file", None)
        if file_ref is not None:
            ref = Path(file_ref)
            if base_dir is not None and not ref.is_absolute():
                ref = base_dir / ref
            if not ref.exists():
                raise ConfigError(f"scenario.file not found: {ref}")
            base = load_scenario(ref)
            if scenario_data:
                merged = _deep_merge(scenario_to_dict(base), scenario_data)
                kwargs["scenario"] = _scenario(merged)
            else:
                kwargs["scenario"] = base
        else:
            kwargs["scenario"] = _scenario(scenario_data)
    else:
        raise ConfigError("scenario: expected a mapping")

    for name, cls in _SECTION_TYPES.items():
        section = data.pop(name, None)
        if section is not None:
            kwargs[name] = _build_section(cls, section, name)

    top_fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - top_fields)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'")
    kwargs.update(data)
    try:
        cfg = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _scenario(data: dict) -> Scenario:
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_env_overrides(data: dict, environ: dict | None = None) -> dict:
    """Fold TWINMIG_* environment variables into a raw config mapping."""
    environ = environ if environ is not None else os.environ
    out = dict(data)
    for key, raw in sorted(environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        parts = [p.lower() for p in key[len(ENV_PREFIX):].split("__") if p]
        if not parts:
            continue
        value = yaml.safe_load(raw)
        cursor = out
        for part in parts[:-1]:
            nxt = cursor.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                cursor[part] = nxt
            cursor = nxt
        cursor[parts[-1]] = value
    return out


def load_config(path: str | Path, use_env: bool = True) -> ExperimentConfig:
    """Load, override, and validate an experiment config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text())
    if raw is None:
        raw = {}
    if use_env:
        raw = apply_env_overrides(raw)
    return config_from_dict(raw, base_dir=path.parent)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["scenario"] = scenario_to_dict(cfg.scenario)
    return out


def save_config(cfg: ExperimentConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=True))
    return path


def config_hash(cfg: ExperimentConfig) -> str:
    """Content hash of the config, ignoring placement (out_dir, run_id)."""
    data = config_to_dict(cfg)
    data.pop("out_dir", None)
    data.pop("run_id", None)
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()
