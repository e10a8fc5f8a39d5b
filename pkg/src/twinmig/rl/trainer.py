"""Actor-critic training for the diffusion policy.

Double critics regress onto y = r + gamma * E_{a' ~ pi'(s')}[min_i Q_i'(s', a')]
(the bootstrap is dropped on terminal transitions); the actor ascends
E_{a ~ pi(s)}[min_i Q_i(s, a)] + temp * H(pi(s)) with gradients flowing
through the reverse chain via recorded noise draws. Target networks track
the online ones with polyak averaging.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass

import numpy as np
import torch

from twinmig.rl.nets import Critic, Denoiser
from twinmig.rl.policy import ChainNoise, action_distribution, draw_chain_noise
from twinmig.rl.replay import ReplayBuffer, Transition
from twinmig.rl.schedule import NoiseSchedule, make_schedule

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """A loss or objective became non-finite during training."""


@dataclass
class TrainerConfig:
    actor_lr: float = 1e-4
    critic_lr: float = 1e-4
    discount_gamma: float = 0.95
    entropy_temp: float = 0.05
    soft_update_tau: float = 0.005
    batch_size: int = 512
    buffer_capacity: int = 1_000_000
    diffusion_steps: int = 100
    beta_min: float = 1e-4
    beta_max: float = 0.02
    hidden_width: int = 256
    time_embed_dim: int = 16
    episodes: int = 300
    warmup_transitions: int | None = None    # None = batch_size
    updates_per_step: int = 1
    eval_every: int = 1                      # greedy test rollout cadence, in episodes

    def __post_init__(self):
        if not 0 < self.discount_gamma < 1:
            raise ValueError("discount_gamma must lie in (0, 1)")
        if self.entropy_temp < 0:
            raise ValueError("entropy_temp must be nonnegative")
        if not 0 < self.soft_update_tau <= 1:
            raise ValueError("soft_update_tau must lie in (0, 1]")
        for name in ("actor_lr", "critic_lr", "batch_size", "buffer_capacity",
                     "diffusion_steps", "hidden_width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.episodes < 0:
            raise ValueError("episodes must be nonnegative")


def soft_update(target: torch.nn.Module, online: torch.nn.Module, tau: float) -> torch.nn.Module:
    """Polyak update target <- (1 - tau) * target + tau * online, in place."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    t_params = list(target.parameters())
    o_params = list(online.parameters())
    if len(t_params) != len(o_params):
        raise ValueError("parameter count mismatch between target and online nets")
    with torch.no_grad():
        for tp, op in zip(t_params, o_params):
            if tp.shape != op.shape:
                raise ValueError(f"parameter shape mismatch: {tuple(tp.shape)} vs {tuple(op.shape)}")
            tp.mul_(1.0 - tau).add_(op, alpha=tau)
    return target


def critic_target(
    rewards: torch.Tensor,
    dones: torch.Tensor,
    next_probs: torch.Tensor,
    next_q1: torch.Tensor,
    next_q2: torch.Tensor,
    gamma: float,
) -> torch.Tensor:
    """Bellman target y = r + gamma * E_{pi'}[min(Q1', Q2')], zero bootstrap when done."""
    expected_min_q = (next_probs * torch.minimum(next_q1, next_q2)).sum(dim=-1)
    return rewards + gamma * (1.0 - dones.to(rewards.dtype)) * expected_min_q


def critic_loss(q1_taken: torch.Tensor, q2_taken: torch.Tensor, y: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Mean squared Bellman errors of the two critics at the taken actions."""
    if q1_taken.numel() == 0:
        raise ValueError("empty batch")
    y = y.detach()
    return ((q1_taken - y) ** 2).mean(), ((q2_taken - y) ** 2).mean()


def policy_objective(
    obs: torch.Tensor,
    denoiser: Denoiser,
    critic1: Critic,
    critic2: Critic,
    sched: NoiseSchedule,
    cfg: TrainerConfig,
    noise: ChainNoise | None = None,
    rng: np.random.Generator | None = None,
    with_parts: bool = False,
):
    """Entropy-regularized policy value, averaged over the observation batch.

    The expectation over actions is exact: sum_a pi(s)[a] * min_i Q_i(s)[a].
    Critic values enter as constants so gradients reach only the denoiser.
    """
    probs = action_distribution(obs, denoiser, sched, rng=rng, noise=noise)
    with torch.no_grad():
        q_min = torch.minimum(critic1(obs), critic2(obs))
    expected_q = (probs * q_min).sum(dim=-1)
    entropy = torch.special.entr(probs).sum(dim=-1)
    objective = (expected_q + cfg.entropy_temp * entropy).mean()
    if with_parts:
        return objective, expected_q.mean(), entropy.mean()
    return objective


def _episode_seed(seed: int, episode: int) -> int:
    return (seed * 1_000_003 + 2 * episode) % (2**31 - 1)


def _eval_seed(seed: int) -> int:
    return (seed * 1_000_003 + 1) % (2**31 - 1)


class DiffusionTrainer:
    """Owns the actor, critics, their targets, optimizers, and replay buffer."""

    def __init__(self, obs_dim: int, n_actions: int, cfg: TrainerConfig, seed: int = 0):
        if n_actions < 1:
            raise ValueError("n_actions must be at least 1")
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.cfg = cfg
        self.seed = int(seed)
        self.sched = make_schedule(cfg.diffusion_steps, cfg.beta_min, cfg.beta_max)

        torch.manual_seed(self.seed)
        self.denoiser = Denoiser(obs_dim, n_actions, cfg.hidden_width, cfg.time_embed_dim)
        self.critic1 = Critic(obs_dim, n_actions, cfg.hidden_width)
        self.critic2 = Critic(obs_dim, n_actions, cfg.hidden_width)
        self.denoiser_target = copy.deepcopy(self.denoiser)
        self.critic1_target = copy.deepcopy(self.critic1)
        self.critic2_target = copy.deepcopy(self.critic2)
        for net in (self.denoiser_target, self.critic1_target, self.critic2_target):
            for p in net.parameters():
                p.requires_grad_(False)

        self.actor_opt = torch.optim.Adam(self.denoiser.parameters(), lr=cfg.actor_lr)
        self.critic_opt = torch.optim.Adam(
            list(self.critic1.parameters()) + list(self.critic2.parameters()),
            lr=cfg.critic_lr,
        )
        self.buffer = ReplayBuffer(cfg.buffer_capacity)
        self.rng = np.random.default_rng([self.seed, 0x5EED])
        self.updates_done = 0

    # ------------------------------------------------------------------ acting

    def policy_probs(self, obs: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        """Action probabilities at one observation (one chain draw)."""
        rng = rng if rng is not None else self.rng
        obs_t = torch.from_numpy(np.asarray(obs, dtype=np.float64)).reshape(1, -1)
        with torch.no_grad():
            probs = action_distribution(obs_t, self.denoiser, self.sched, rng=rng)
        return probs.numpy()[0]

    def act(self, obs: np.ndarray, rng: np.random.Generator | None = None,
            greedy: bool = False) -> tuple[int, np.ndarray]:
        rng = rng if rng is not None else self.rng
        probs = self.policy_probs(obs, rng)
        if greedy:
            return int(np.argmax(probs)), probs
        return int(rng.choice(self.n_actions, p=probs)), probs

    def observe(self, tr: Transition) -> None:
        self.buffer.push(tr)

    # ---------------------------------------------------------------- updating

    def update(self) -> dict[str, float]:
        """One critic step, one actor step, one round of soft target updates."""
        cfg = self.cfg
        batch = self.buffer.sample(self.rng, cfg.batch_size)
        obs = torch.from_numpy(batch["obs"])
        next_obs = torch.from_numpy(batch["next_obs"])
        actions = torch.from_numpy(batch["actions"]).reshape(-1, 1)
        rewards = torch.from_numpy(batch["rewards"])
        dones = torch.from_numpy(batch["dones"])

        with torch.no_grad():
            next_probs = action_distribution(next_obs, self.denoiser_target, self.sched, rng=self.rng)
            y = critic_target(rewards, dones, next_probs,
                              self.critic1_target(next_obs), self.critic2_target(next_obs),
                              cfg.discount_gamma)

        q1 = self.critic1(obs).gather(1, actions).squeeze(1)
        q2 = self.critic2(obs).gather(1, actions).squeeze(1)
        loss1, loss2 = critic_loss(q1, q2, y)
        self.critic_opt.zero_grad()
        (loss1 + loss2).backward()
        self.critic_opt.step()

        noise = draw_chain_noise(self.rng, obs.shape[0], self.n_actions, self.sched.steps)
        objective, expected_q, entropy = policy_objective(
            obs, self.denoiser, self.critic1, self.critic2, self.sched, cfg,
            noise=noise, with_parts=True,
        )
        self.actor_opt.zero_grad()
        (-objective).backward()
        self.actor_opt.step()

        soft_update(self.denoiser_target, self.denoiser, cfg.soft_update_tau)
        soft_update(self.critic1_target, self.critic1, cfg.soft_update_tau)
        soft_update(self.critic2_target, self.critic2, cfg.soft_update_tau)
        self.updates_done += 1

        metrics = {
            "critic_loss": float((loss1 + loss2).item()) / 2.0,
            "actor_objective": float(objective.item()),
            "expected_q": float(expected_q.item()),
            "entropy": float(entropy.item()),
        }
        if not all(math.isfinite(v) for v in metrics.values()):
            raise TrainingDiverged(f"non-finite training metrics at update {self.updates_done}: {metrics}")
        return metrics


def rollout(env, trainer: DiffusionTrainer, seed: int, greedy: bool = True) -> tuple[float, float]:
    """One policy episode; returns (return, mean total latency)."""
    rng = np.random.default_rng([seed, 0xE7A1])
    obs = env.reset(seed=seed)
    done = False
    ep_return = 0.0
    latencies = []
    while not done:
        action, _ = trainer.act(obs, rng=rng, greedy=greedy)
        obs, reward, done, info = env.step(action)
        ep_return += reward
        latencies.append(info["latency"].total_s)
    return ep_return, float(np.mean(latencies))


def train(env, cfg: TrainerConfig, seed: int = 0) -> tuple[DiffusionTrainer, list[dict]]:
    """Episodic training loop; returns the trainer and per-episode metrics.

    The env contract: reset(seed) -> obs, step(a) -> (obs, reward, done, info)
    with info["latency"].total_s, plus obs_dim and num_actions attributes.
    Deterministic for fixed (env scenario, cfg, seed).
    """
    trainer = DiffusionTrainer(env.obs_dim, env.num_actions, cfg, seed)
    warmup = cfg.warmup_transitions if cfg.warmup_transitions is not None else cfg.batch_size
    rows: list[dict] = []

    for ep in range(cfg.episodes):
        obs = env.reset(seed=_episode_seed(seed, ep))
        if env.num_actions != trainer.n_actions:
            raise ValueError(
                f"action-space size changed: policy has {trainer.n_actions}, "
                f"environment now offers {env.num_actions}"
            )
        done = False
        ep_return = 0.0
        latencies: list[float] = []
        update_metrics: list[dict[str, float]] = []
        while not done:
            action, _ = trainer.act(obs)
            next_obs, reward, done, info = env.step(action)
            trainer.observe(Transition(obs, action, reward, next_obs, done))
            obs = next_obs
            ep_return += reward
            latencies.append(info["latency"].total_s)
            if len(trainer.buffer) >= max(warmup, 1):
                for _ in range(cfg.updates_per_step):
                    update_metrics.append(trainer.update())

        row = {
            "episode": ep,
            "return": ep_return,
            "mean_latency": float(np.mean(latencies)),
            "critic_loss": float(np.mean([m["critic_loss"] for m in update_metrics])) if update_metrics else math.nan,
            "actor_objective": float(np.mean([m["actor_objective"] for m in update_metrics])) if update_metrics else math.nan,
            "entropy": float(np.mean([m["entropy"] for m in update_metrics])) if update_metrics else math.nan,
        }
        if cfg.eval_every > 0 and ep % cfg.eval_every == 0:
            test_return, test_latency = rollout(env, trainer, _eval_seed(seed), greedy=True)
        else:
            test_return, test_latency = math.nan, math.nan
        row["test_return"] = test_return
        row["test_mean_latency"] = test_latency
        rows.append(row)
        log.debug("episode %d: return=%.4f test_return=%.4f", ep, ep_return, test_return)

    return trainer, rows
