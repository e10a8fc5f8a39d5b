"""Denoiser and critic networks.

Small fully-connected nets in float64. The denoiser predicts per-action
noise from (noisy logits, timestep embedding, observation); each critic maps
an observation to one value per action, which keeps policy expectations
computable in closed form.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn

DTYPE = torch.float64


def timestep_embedding(t: int, dim: int) -> torch.Tensor:
    """Sinusoidal embedding of an integer diffusion step, shape [dim]."""
    if dim < 2 or dim % 2 != 0:
        raise ValueError("embedding dim must be an even number >= 2")
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=DTYPE) / max(half - 1, 1)
    )
    angles = float(t) * freqs
    return torch.cat([torch.sin(angles), torch.cos(angles)])


def _mlp(in_dim: int, hidden: int, out_dim: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, hidden, dtype=DTYPE),
        nn.SiLU(),
        nn.Linear(hidden, hidden, dtype=DTYPE),
        nn.SiLU(),
        nn.Linear(hidden, out_dim, dtype=DTYPE),
    )


class Denoiser(nn.Module):
    """Noise predictor eps(x_t, t, s) -> per-action vector."""

    def __init__(self, obs_dim: int, n_actions: int, hidden: int = 256, time_dim: int = 16):
        super().__init__()
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.time_dim = time_dim
        self.net = _mlp(n_actions + time_dim + obs_dim, hidden, n_actions)

    def forward(self, x: torch.Tensor, t: int, obs: torch.Tensor) -> torch.Tensor:
        emb = timestep_embedding(t, self.time_dim).expand(x.shape[0], -1)
        return self.net(torch.cat([x, emb, obs], dim=-1))


class Critic(nn.Module):
    """Action-value head Q(s) -> vector of per-action values."""

    def __init__(self, obs_dim: int, n_actions: int, hidden: int = 256):
        super().__init__()
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.net = _mlp(obs_dim, hidden, n_actions)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.net(obs)
