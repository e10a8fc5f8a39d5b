"""Variance schedule of the forward noising process.

Step t in 1..N mixes the signal with Gaussian noise:

    x_t = sqrt(1 - beta_t) * x_{t-1} + sqrt(beta_t) * z,   z ~ N(0, I)

alpha_t = 1 - beta_t and alpha_bar_t is the running product; the reverse
chain uses the posterior stddev sigma_t = sqrt(beta_t * (1 - alpha_bar_{t-1})
/ (1 - alpha_bar_t)), which vanishes at t = 1 so the last reverse step is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray
    alphas: np.ndarray = field(init=False)
    alpha_bars: np.ndarray = field(init=False)

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas must be a non-empty 1-D sequence")
        if np.any(betas <= 0) or np.any(betas >= 1):
            raise ValueError("every beta must lie strictly inside (0, 1)")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", 1.0 - betas)
        object.__setattr__(self, "alpha_bars", np.cumprod(1.0 - betas))

    @property
    def steps(self) -> int:
        return int(self.betas.size)

    def beta(self, t: int) -> float:
        """beta_t for 1-based step t."""
        self._check_step(t)
        return float(self.betas[t - 1])

    def alpha(self, t: int) -> float:
        self._check_step(t)
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        """Cumulative product up to step t; alpha_bar(0) = 1 by convention."""
        if t == 0:
            return 1.0
        self._check_step(t)
        return float(self.alpha_bars[t - 1])

    def sigma(self, t: int) -> float:
        """Posterior stddev of the reverse step at t; sigma(1) = 0."""
        self._check_step(t)
        var = self.beta(t) * (1.0 - self.alpha_bar(t - 1)) / (1.0 - self.alpha_bar(t))
        return math.sqrt(var)

    def _check_step(self, t: int) -> None:
        if not 1 <= t <= self.steps:
            raise ValueError(f"step {t} outside 1..{self.steps}")


def make_schedule(steps: int, beta_min: float = 1e-4, beta_max: float = 0.02) -> NoiseSchedule:
    """Linear beta schedule from beta_min to beta_max over ``steps`` steps."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not 0 < beta_min <= beta_max < 1:
        raise ValueError("need 0 < beta_min <= beta_max < 1")
    if steps == 1:
        betas = np.array([beta_min], dtype=np.float64)
    else:
        betas = np.linspace(beta_min, beta_max, steps, dtype=np.float64)
    return NoiseSchedule(betas=betas)


def forward_noising(x_prev: np.ndarray, t: int, sched: NoiseSchedule, noise: np.ndarray) -> np.ndarray:
    """One forward noising step (reparameterized sample of q(x_t | x_{t-1}))."""
    x_prev = np.asarray(x_prev, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if x_prev.shape != noise.shape:
        raise ValueError(f"shape mismatch: x {x_prev.shape} vs noise {noise.shape}")
    beta = sched.beta(t)
    return math.sqrt(1.0 - beta) * x_prev + math.sqrt(beta) * noise
