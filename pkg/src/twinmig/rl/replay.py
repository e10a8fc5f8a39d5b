"""Bounded FIFO experience replay with uniform batch sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool


class ReplayBuffer:
    """Ring buffer of transitions; sampling is uniform without replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = int(capacity)
        self._obs: np.ndarray | None = None
        self._next_obs: np.ndarray | None = None
        self._actions: np.ndarray | None = None
        self._rewards: np.ndarray | None = None
        self._dones: np.ndarray | None = None
        self._size = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self._size

    def push(self, tr: Transition) -> None:
        if self._obs is None:
            dim = tr.obs.shape[0]
            self._obs = np.zeros((self.capacity, dim), dtype=np.float64)
            self._next_obs = np.zeros((self.capacity, dim), dtype=np.float64)
            self._actions = np.zeros(self.capacity, dtype=np.int64)
            self._rewards = np.zeros(self.capacity, dtype=np.float64)
            self._dones = np.zeros(self.capacity, dtype=bool)
        i = self._cursor
        self._obs[i] = tr.obs
        self._next_obs[i] = tr.next_obs
        self._actions[i] = tr.action
        self._rewards[i] = tr.reward
        self._dones[i] = tr.done
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int) -> dict[str, np.ndarray]:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        batch_size = min(batch_size, self._size)
        idx = rng.choice(self._size, size=batch_size, replace=False)
        return {
            "obs": self._obs[idx],
            "actions": self._actions[idx],
            "rewards": self._rewards[idx],
            "next_obs": self._next_obs[idx],
            "dones": self._dones[idx],
        }
