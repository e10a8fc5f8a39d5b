"""End-to-end run orchestration for every subcommand.

Each run writes, under <out_dir>/<run_id>/:
  metrics.csv            the flat metric table (delimited-table format)
  summary.json           RunSummary document (no wall clock, reproducible)
  config_resolved.yaml   the exact configuration that produced the run
plus mode-specific artifacts (checkpoints, reward curves, sweep tables,
route traces). Reruns with the same config and seeds produce byte-identical
metric files; run ids derive from the config hash.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from pathlib import Path

import numpy as np
import torch

from twinmig.durp.controllers import make_controller
from twinmig.durp.planner import HeuristicWeights, mission_energy
from twinmig.experiments.agents import TrainedPolicyAgent, make_baseline_agent
from twinmig.experiments.config import ConfigError, ExperimentConfig, config_hash, save_config
from twinmig.experiments.metrics import (
    MetricsRecord,
    RunSummary,
    emit_metrics,
    summarize_records,
    write_summary,
)
from twinmig.mdp import EnvConfig, PreMigrationEnv
from twinmig.rl.checkpoint import load_checkpoint, save_checkpoint
from twinmig.rl.trainer import train
from twinmig.simcore.scenario import Scenario, scenario_from_dict, scenario_to_dict
from twinmig.simcore.world import make_world, step_world

log = logging.getLogger(__name__)


def _run_dir(cfg: ExperimentConfig) -> tuple[str, Path]:
    run_id = cfg.run_id or f"{cfg.mode}-{config_hash(cfg)[:12]}"
    out = Path(cfg.out_dir) / run_id
    out.mkdir(parents=True, exist_ok=True)
    return run_id, out


def _env_config(cfg: ExperimentConfig, uav_mode: str | None = None) -> EnvConfig:
    env = cfg.env
    return EnvConfig(
        alpha_levels=env.alpha_levels,
        penalty_weight=env.penalty_weight,
        t_norm_s=env.t_norm_s,
        uav_targets=env.uav_targets,
        uav_target_radius_m=env.uav_target_radius_m,
        target_mode=env.target_mode,
        uav_mode=env.uav_mode if uav_mode is None else uav_mode,
        strict_paper=cfg.strict_paper,
        durp_weights=HeuristicWeights(cfg.durp.w_dist, cfg.durp.w_energy, cfg.durp.w_load),
        goal_hysteresis=cfg.durp.goal_hysteresis,
    )


def _scenario_variant(scenario: Scenario, compute_cps: float | None = None,
                      uav_count: int | None = None) -> Scenario:
    data = scenario_to_dict(scenario)
    if compute_cps is not None:
        data["rsu"]["compute_cps"] = float(compute_cps)
    if uav_count is not None:
        data["uav"]["count"] = int(uav_count)
    return scenario_from_dict(data)


def _episode_seed(seed: int, episode: int) -> int:
    return (seed * 100_003 + episode) % (2**31 - 1)


def _evaluate(env: PreMigrationEnv, agent, seed: int, episodes: int) -> list[dict]:
    """Frozen-policy rollouts; one row per episode."""
    rng = np.random.default_rng([seed, 0xBA5E])
    rows = []
    for ep in range(episodes):
        obs = env.reset(seed=_episode_seed(seed, ep))
        done = False
        ep_return = 0.0
        latencies = []
        violations = 0
        while not done:
            action = agent.act(env, obs, rng)
            obs, reward, done, info = env.step(action)
            ep_return += reward
            latencies.append(info["latency"].total_s)
            violations += info["violations"]
        rows.append({
            "episode": ep,
            "return": ep_return,
            "mean_latency": float(np.mean(latencies)),
            "violations": float(violations),
        })
    return rows


def _finish(cfg: ExperimentConfig, run_id: str, out: Path, records: list[MetricsRecord],
            artifacts: list[str], started: float) -> RunSummary:
    per_seed, aggregates = summarize_records(records)
    summary = RunSummary(
        run_id=run_id,
        mode=cfg.mode,
        config_hash=config_hash(cfg),
        seeds=list(cfg.seeds),
        per_seed=per_seed,
        aggregates=aggregates,
        artifacts=sorted(artifacts),
        wall_clock_s=time.monotonic() - started,
    )
    emit_metrics(records, "delimited-table", out / "metrics.csv")
    write_summary(summary, out / "summary.json")
    save_config(cfg, out / "config_resolved.yaml")
    return summary


def run_training(cfg: ExperimentConfig) -> RunSummary:
    """Train the diffusion policy per seed; writes checkpoints, metric logs,
    and a test-reward curve file (episode, reward, moving average)."""
    started = time.monotonic()
    run_id, out = _run_dir(cfg)
    records: list[MetricsRecord] = []
    artifacts = ["metrics.csv", "summary.json", "config_resolved.yaml"]

    curve_lines = ["seed,episode,test_return,test_return_ma10"]
    for seed in cfg.seeds:
        env = PreMigrationEnv(cfg.scenario, _env_config(cfg))
        trainer, rows = train(env, cfg.trainer, seed)
        if cfg.trainer.episodes > 0:
            ckpt_name = f"checkpoint_seed{seed}.pt"
            save_checkpoint(out / ckpt_name, trainer, meta={
                "run_id": run_id, "seed": seed, "config_hash": config_hash(cfg),
            })
            artifacts.append(ckpt_name)

        test_curve: list[float] = []
        for row in rows:
            ep = row["episode"]
            pairs = [
                ("train_return", row["return"], "reward"),
                ("train_mean_latency", row["mean_latency"], "s"),
                ("test_return", row["test_return"], "reward"),
                ("test_mean_latency", row["test_mean_latency"], "s"),
                ("critic_loss", row["critic_loss"], "loss"),
                ("actor_objective", row["actor_objective"], "objective"),
                ("entropy", row["entropy"], "nats"),
            ]
            for metric, value, units in pairs:
                if math.isfinite(value):
                    records.append(MetricsRecord(run_id, seed, ep, metric, float(value), units))
            if math.isfinite(row["test_return"]):
                test_curve.append(row["test_return"])
                window = test_curve[-10:]
                curve_lines.append(
                    f"{seed},{ep},{row['test_return']!r},{float(np.mean(window))!r}"
                )

    (out / "reward_curve.csv").write_bytes(("\n".join(curve_lines) + "\n").encode("ascii"))
    artifacts.append("reward_curve.csv")
    return _finish(cfg, run_id, out, records, artifacts, started)


def _eval_agent(cfg: ExperimentConfig, checkpoint: str | None):
    policy = cfg.eval.policy
    if policy == "checkpoint":
        path = checkpoint or cfg.eval.checkpoint
        if not path:
            raise ConfigError("eval.policy is 'checkpoint' but no checkpoint path was given")
        trainer, _ = load_checkpoint(path)
        return TrainedPolicyAgent(trainer)
    return make_baseline_agent(policy)


def run_eval(cfg: ExperimentConfig, checkpoint: str | None = None) -> RunSummary:
    """Frozen-policy rollouts over the configured compute/assist sweep.

    With a checkpoint policy, assist off disables UAV motion and absorption
    but keeps the UAV in the action space so the policy head still fits;
    scripted policies drop the UAV from the scenario entirely.
    """
    started = time.monotonic()
    run_id, out = _run_dir(cfg)
    agent = _eval_agent(cfg, checkpoint)
    keep_uav_nodes = cfg.eval.policy == "checkpoint"

    sweep = cfg.eval.rsu_compute_sweep_cps or [cfg.scenario.rsu.compute_cps]
    assist_modes = cfg.eval.assist_modes or [True]
    records: list[MetricsRecord] = []
    table = ["compute_cps,assist,seed,mean_latency_s,mean_return"]

    for compute in sweep:
        for assist in assist_modes:
            if assist or keep_uav_nodes:
                scenario = _scenario_variant(cfg.scenario, compute_cps=compute)
            else:
                scenario = _scenario_variant(cfg.scenario, compute_cps=compute, uav_count=0)
            env = PreMigrationEnv(scenario, _env_config(cfg, uav_mode=None if assist else "none"))
            tag = f"c{int(round(compute / 1e9))}ghz_assist{int(assist)}"
            for seed in cfg.seeds:
                rows = _evaluate(env, agent, seed, cfg.eval.episodes)
                for row in rows:
                    records.append(MetricsRecord(run_id, seed, row["episode"],
                                                 f"mean_latency_{tag}", row["mean_latency"], "s"))
                    records.append(MetricsRecord(run_id, seed, row["episode"],
                                                 f"return_{tag}", row["return"], "reward"))
                mean_lat = float(np.mean([r["mean_latency"] for r in rows]))
                mean_ret = float(np.mean([r["return"] for r in rows]))
                table.append(f"{float(compute)!r},{int(assist)},{seed},{mean_lat!r},{mean_ret!r}")

    (out / "latency_vs_capacity.csv").write_bytes(("\n".join(table) + "\n").encode("ascii"))
    artifacts = ["metrics.csv", "summary.json", "config_resolved.yaml", "latency_vs_capacity.csv"]
    return _finish(cfg, run_id, out, records, artifacts, started)


def run_baseline(cfg: ExperimentConfig, kind: str | None = None) -> RunSummary:
    """Evaluate a scripted baseline with the same metric schema as training
    evaluation, enabling paired comparisons on identical seeds."""
    started = time.monotonic()
    kind = kind or cfg.baseline
    run_id, out = _run_dir(cfg)
    if kind == "no-uav":
        scenario = _scenario_variant(cfg.scenario, uav_count=0)
        env = PreMigrationEnv(scenario, _env_config(cfg, uav_mode="none"))
    else:
        scenario = cfg.scenario
        env = PreMigrationEnv(scenario, _env_config(cfg))
    agent = make_baseline_agent(kind)

    records: list[MetricsRecord] = []
    for seed in cfg.seeds:
        for row in _evaluate(env, agent, seed, cfg.eval.episodes):
            ep = row["episode"]
            records.append(MetricsRecord(run_id, seed, ep, "return", row["return"], "reward"))
            records.append(MetricsRecord(run_id, seed, ep, "mean_latency", row["mean_latency"], "s"))
            records.append(MetricsRecord(run_id, seed, ep, "violations", row["violations"], "count"))
    artifacts = ["metrics.csv", "summary.json", "config_resolved.yaml"]
    return _finish(cfg, run_id, out, records, artifacts, started)


def run_route_study(cfg: ExperimentConfig) -> RunSummary:
    """Run the UAV routing algorithms over seeded workload processes.

    Per (algorithm, seed): a route trace file, plus mean-workload, workload
    fluctuation (across-node stddev), and mission-energy records.
    """
    started = time.monotonic()
    run_id, out = _run_dir(cfg)
    scenario = cfg.scenario
    if scenario.uav.count < 1:
        raise ConfigError("route study requires at least one UAV in the scenario")
    weights = HeuristicWeights(cfg.durp.w_dist, cfg.durp.w_energy, cfg.durp.w_load)

    records: list[MetricsRecord] = []
    artifacts = ["metrics.csv", "summary.json", "config_resolved.yaml",
                 "workload_summary.csv", "energy_summary.csv"]
    workload_table = ["algorithm,seed,mean_workload_cycles,workload_std_cycles"]
    energy_table = ["algorithm,seed,mission_energy_j,battery_initial_j,battery_final_j"]

    for alg in cfg.route.algorithms:
        for seed in cfg.seeds:
            world = make_world(scenario, seed)
            controllers = [
                make_controller(alg, scenario, uav.id, weights=weights,
                                strict_paper=cfg.strict_paper,
                                goal_hysteresis=cfg.durp.goal_hysteresis)
                for uav in world.uavs
            ]
            n_rsus = scenario.num_rsus
            trace_lines = ["step,uav_id,x_m,y_m,goal_id,path_len,battery_j,"
                           + ",".join(f"rsu{r}_load" for r in range(n_rsus))]
            means, stds = [], []
            for slot in range(1, scenario.t_max + 1):
                for controller in controllers:
                    controller.step(world, slot)
                loads = np.array([r.workload_cycles for r in world.rsus], dtype=np.float64)
                means.append(float(np.mean(loads)))
                stds.append(float(np.std(loads)))
                for controller in controllers:
                    uav = world.node(controller.uav_node_id)
                    goal = controller.planner.goal_id
                    plan = controller.planner.last_plan
                    trace_lines.append(
                        f"{slot},{controller.uav_node_id},{uav.pos.x!r},{uav.pos.y!r},"
                        f"{goal if goal is not None else controller.planner.node_id},"
                        f"{len(plan.path) if plan else 1},{controller.battery_j!r},"
                        + ",".join(repr(v) for v in loads)
                    )
                if slot < scenario.t_max:
                    world = step_world(world)

            energy = sum(mission_energy(c.trace, c.energy) for c in controllers)
            battery0 = sum(c.initial_battery_j for c in controllers)
            battery1 = sum(c.battery_j for c in controllers)
            mean_wl = float(np.mean(means))
            std_wl = float(np.mean(stds))
            records.append(MetricsRecord(run_id, seed, 0, f"mean_workload[{alg}]", mean_wl, "cycles"))
            records.append(MetricsRecord(run_id, seed, 0, f"workload_std[{alg}]", std_wl, "cycles"))
            records.append(MetricsRecord(run_id, seed, 0, f"mission_energy[{alg}]", energy, "J"))
            workload_table.append(f"{alg},{seed},{mean_wl!r},{std_wl!r}")
            energy_table.append(f"{alg},{seed},{energy!r},{battery0!r},{battery1!r}")

            trace_name = f"route_trace_{alg}_seed{seed}.csv"
            (out / trace_name).write_bytes(("\n".join(trace_lines) + "\n").encode("ascii"))
            artifacts.append(trace_name)

    (out / "workload_summary.csv").write_bytes(("\n".join(workload_table) + "\n").encode("ascii"))
    (out / "energy_summary.csv").write_bytes(("\n".join(energy_table) + "\n").encode("ascii"))
    return _finish(cfg, run_id, out, records, artifacts, started)


def run_sweep(cfg: ExperimentConfig, checkpoint: str | None = None) -> RunSummary:
    """Latency-versus-capacity study over 40..80 GHz with assist on and off."""
    sweep_cfg = dataclasses.replace(
        cfg.eval,
        rsu_compute_sweep_cps=cfg.eval.rsu_compute_sweep_cps
        or [4.0e10, 5.0e10, 6.0e10, 7.0e10, 8.0e10],
        assist_modes=cfg.eval.assist_modes if cfg.eval.assist_modes != [True] else [True, False],
    )
    return run_eval(dataclasses.replace(cfg, eval=sweep_cfg), checkpoint=checkpoint)


def run(cfg: ExperimentConfig, checkpoint: str | None = None) -> RunSummary:
    """Dispatch on cfg.mode. Single-threaded torch keeps runs bit-reproducible."""
    torch.set_num_threads(1)
    cfg.validate()
    if cfg.mode == "train":
        return run_training(cfg)
    if cfg.mode == "eval":
        return run_eval(cfg, checkpoint=checkpoint)
    if cfg.mode == "baseline":
        return run_baseline(cfg)
    if cfg.mode == "route":
        return run_route_study(cfg)
    if cfg.mode == "sweep":
        return run_sweep(cfg, checkpoint=checkpoint)
    raise ConfigError(f"unknown mode '{cfg.mode}'")
