"""Diffusion-policy reinforcement learning: a denoising-chain actor that
emits discrete-action probabilities, double critics with target networks,
experience replay, and entropy-regularized policy improvement."""

from twinmig.rl.schedule import NoiseSchedule, make_schedule, forward_noising
from twinmig.rl.nets import Denoiser, Critic, timestep_embedding
from twinmig.rl.policy import (
    ChainNoise,
    draw_chain_noise,
    reverse_mean,
    sample_action_logits,
    action_distribution,
)
from twinmig.rl.replay import Transition, ReplayBuffer
from twinmig.rl.trainer import (
    TrainerConfig,
    TrainingDiverged,
    DiffusionTrainer,
    critic_target,
    critic_loss,
    policy_objective,
    soft_update,
    train,
)
from twinmig.rl.checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "forward_noising",
    "Denoiser",
    "Critic",
    "timestep_embedding",
    "ChainNoise",
    "draw_chain_noise",
    "reverse_mean",
    "sample_action_logits",
    "action_distribution",
    "Transition",
    "ReplayBuffer",
    "TrainerConfig",
    "TrainingDiverged",
    "DiffusionTrainer",
    "critic_target",
    "critic_loss",
    "policy_objective",
    "soft_update",
    "train",
    "save_checkpoint",
    "load_checkpoint",
]
