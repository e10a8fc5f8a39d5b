"""Versioned trainer checkpoints that round-trip parameters bit-exactly."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import torch

from twinmig.rl.trainer import DiffusionTrainer, TrainerConfig

FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, trainer: DiffusionTrainer, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "trainer_config": dataclasses.asdict(trainer.cfg),
        "obs_dim": trainer.obs_dim,
        "n_actions": trainer.n_actions,
        "seed": trainer.seed,
        "betas": np.asarray(trainer.sched.betas),
        "state": {
            "denoiser": trainer.denoiser.state_dict(),
            "denoiser_target": trainer.denoiser_target.state_dict(),
            "critic1": trainer.critic1.state_dict(),
            "critic2": trainer.critic2.state_dict(),
            "critic1_target": trainer.critic1_target.state_dict(),
            "critic2_target": trainer.critic2_target.state_dict(),
            "actor_opt": trainer.actor_opt.state_dict(),
            "critic_opt": trainer.critic_opt.state_dict(),
        },
        "meta": meta or {},
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | Path) -> tuple[DiffusionTrainer, dict]:
    """Rebuild a trainer from a checkpoint; returns (trainer, meta)."""
    payload = torch.load(Path(path), weights_only=False)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {version!r}")
    cfg = TrainerConfig(**payload["trainer_config"])
    trainer = DiffusionTrainer(payload["obs_dim"], payload["n_actions"], cfg, payload["seed"])
    state = payload["state"]
    trainer.denoiser.load_state_dict(state["denoiser"])
    trainer.denoiser_target.load_state_dict(state["denoiser_target"])
    trainer.critic1.load_state_dict(state["critic1"])
    trainer.critic2.load_state_dict(state["critic2"])
    trainer.critic1_target.load_state_dict(state["critic1_target"])
    trainer.critic2_target.load_state_dict(state["critic2_target"])
    trainer.actor_opt.load_state_dict(state["actor_opt"])
    trainer.critic_opt.load_state_dict(state["critic_opt"])
    return trainer, payload["meta"]
