"""Reverse denoising chain and the discrete action distribution.

Action logits are generated by running the learned reverse chain from pure
Gaussian noise down to x_0 and passing x_0 through a softmax. Each reverse
step is

    x_{t-1} = mu(x_t, t, s) + sigma_t * z,
    mu = (x_t - beta_t * tanh(eps(x_t, t, s)) / sqrt(1 - alpha_bar_t)) / sqrt(alpha_t)

with z ~ N(0, I) except at t = 1 where sigma_1 = 0. Recording the Gaussian
draws (ChainNoise) makes the chain a deterministic, differentiable function
of the denoiser parameters, which the policy update exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch

from twinmig.rl.schedule import NoiseSchedule

EpsModel = Callable[[torch.Tensor, int, torch.Tensor], torch.Tensor]


@dataclass
class ChainNoise:
    """Frozen Gaussian draws for one reverse chain over a batch.

    x_init is the start x_N; z[i] is the injected noise of step t = N - i,
    covering t = N..2 (the final step t = 1 is deterministic).
    """

    x_init: torch.Tensor
    z: list[torch.Tensor]


def draw_chain_noise(rng: np.random.Generator, batch: int, n_actions: int, steps: int) -> ChainNoise:
    """Sample every Gaussian used by one reverse chain, in a fixed order."""
    x_init = torch.from_numpy(rng.standard_normal((batch, n_actions)))
    z = [torch.from_numpy(rng.standard_normal((batch, n_actions))) for _ in range(steps - 1)]
    return ChainNoise(x_init=x_init, z=z)


def reverse_mean(
    x_t: torch.Tensor,
    t: int,
    obs: torch.Tensor,
    eps_model: EpsModel,
    sched: NoiseSchedule,
) -> torch.Tensor:
    """Mean of the reverse transition at step t (tanh-squashed noise estimate)."""
    beta = sched.beta(t)
    alpha = sched.alpha(t)
    alpha_bar = sched.alpha_bar(t)
    eps = eps_model(x_t, t, obs)
    return (x_t - beta * torch.tanh(eps) / math.sqrt(1.0 - alpha_bar)) / math.sqrt(alpha)


def sample_action_logits(
    obs: torch.Tensor,
    eps_model: EpsModel,
    sched: NoiseSchedule,
    rng: np.random.Generator | None = None,
    noise: ChainNoise | None = None,
) -> torch.Tensor:
    """Run the reverse chain and return the action logits x_0, shape [B, K].

    Exactly one of ``rng`` (draw fresh noise) or ``noise`` (reuse recorded
    draws, keeping the chain differentiable and repeatable) must be given.
    """
    if (rng is None) == (noise is None):
        raise ValueError("provide exactly one of rng or noise")
    if obs.ndim != 2:
        raise ValueError("obs must be [batch, obs_dim]")
    batch = obs.shape[0]
    steps = sched.steps
    if noise is None:
        n_actions = getattr(eps_model, "n_actions", None)
        if n_actions is None:
            raise ValueError("eps_model must expose n_actions when sampling fresh noise")
        noise = draw_chain_noise(rng, batch, n_actions, steps)

    x = noise.x_init
    for i, t in enumerate(range(steps, 0, -1)):
        mu = reverse_mean(x, t, obs, eps_model, sched)
        if t > 1:
            x = mu + sched.sigma(t) * noise.z[i]
        else:
            x = mu
    return x


def action_distribution(
    obs: torch.Tensor,
    eps_model: EpsModel,
    sched: NoiseSchedule,
    rng: np.random.Generator | None = None,
    noise: ChainNoise | None = None,
) -> torch.Tensor:
    """Softmax policy pi(s) over the chain's logits, shape [B, K]."""
    logits = sample_action_logits(obs, eps_model, sched, rng=rng, noise=noise)
    return torch.softmax(logits, dim=-1)
