"""Decision agents for evaluation runs: scripted baselines and the trained policy."""

from __future__ import annotations

import numpy as np

from twinmig.mdp import PreMigrationEnv
from twinmig.rl.trainer import DiffusionTrainer
from twinmig.simcore.geometry import ground_distance


class RandomMigrationAgent:
    """Uniform choice over the current action space."""

    name = "random"

    def act(self, env: PreMigrationEnv, obs: np.ndarray, rng: np.random.Generator) -> int:
        return int(rng.integers(env.num_actions))


class GreedyNearestAgent:
    """Pre-migrates to the nearest eligible node with the ratio that
    minimizes the one-step latency (falls back to no pre-migration)."""

    name = "greedy-nearest"

    def act(self, env: PreMigrationEnv, obs: np.ndarray, rng: np.random.Generator) -> int:
        world = env.world
        targets = env.eligible_targets()
        if not targets:
            return 0
        nearest = min(
            targets,
            key=lambda nid: (ground_distance(world.node(nid).pos, world.vehicle.pos), nid),
        )
        space = env.action_space()
        candidates = [0] + [i for i, a in enumerate(space) if a.target_node == nearest and a.alpha_bin > 0]
        latencies = [env.action_latency(i).total_s for i in candidates]
        return candidates[int(np.argmin(latencies))]


class NoPreMigrationAgent:
    """Always serves the whole task at the serving node."""

    name = "no-premig"

    def act(self, env: PreMigrationEnv, obs: np.ndarray, rng: np.random.Generator) -> int:
        return 0


class TrainedPolicyAgent:
    """Greedy action of a trained diffusion policy (argmax of one chain draw)."""

    name = "checkpoint"

    def __init__(self, trainer: DiffusionTrainer):
        self.trainer = trainer

    def act(self, env: PreMigrationEnv, obs: np.ndarray, rng: np.random.Generator) -> int:
        if env.num_actions != self.trainer.n_actions:
            raise ValueError(
                f"policy expects {self.trainer.n_actions} actions but the "
                f"environment offers {env.num_actions}"
            )
        action, _ = self.trainer.act(obs, rng=rng, greedy=True)
        return action


def make_baseline_agent(kind: str):
    agents = {
        "random": RandomMigrationAgent,
        "greedy-nearest": GreedyNearestAgent,
        "no-premig": NoPreMigrationAgent,
        "no-uav": RandomMigrationAgent,   # the UAV is removed from the scenario instead
    }
    try:
        return agents[kind]()
    except KeyError:
        raise ValueError(f"unknown agent kind '{kind}'") from None
