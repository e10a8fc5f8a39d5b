"""Episodic decision process over the edge-network world.

Each slot the agent picks a pre-migration target and a quantized ratio for
the current twin task. The reward is the negative total service latency,
normalized so a typical single-node round costs about 1, minus a penalty
per overloaded node. Overload is a soft constraint: the action still
executes so the agent can learn to avoid it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from twinmig.durp.controllers import UavController, make_controller
from twinmig.durp.planner import HeuristicWeights
from twinmig.simcore.geometry import ground_distance
from twinmig.simcore.latency import LatencyBreakdown, TaskSpec, total_latency
from twinmig.simcore.channel import downlink_rate
from twinmig.simcore.scenario import Scenario
from twinmig.simcore.world import WorldState, make_world, step_world


class ActionError(ValueError):
    """The action is not part of the current action space."""


@dataclass(frozen=True)
class MigrationAction:
    """Pre-migrate alpha_grid[alpha_bin] of the task to target_node.

    alpha_bin 0 means no pre-migration; its target equals the serving node.
    """

    target_node: int
    alpha_bin: int


@dataclass
class EnvConfig:
    """Decision-process knobs on top of a Scenario."""

    alpha_levels: int = 10              # ratio grid {0, 1/L, ..., (L-1)/L}
    penalty_weight: float = 1.0
    t_norm_s: float | None = None       # None = median single-node latency at reset
    uav_targets: bool = True
    # pre-migration eligibility radius around the serving RSU; None keeps
    # UAVs always eligible so the action-space size never changes mid-episode
    uav_target_radius_m: float | None = None
    target_mode: str = "joint"          # "joint" (target, ratio) or "alpha-only"
    uav_mode: str = "none"              # none | durp | random-walk | static-hover | greedy-hotspot
    strict_paper: bool = False
    durp_weights: HeuristicWeights = field(default_factory=HeuristicWeights)
    goal_hysteresis: float = 1.0

    def __post_init__(self):
        if self.alpha_levels < 1:
            raise ValueError("alpha_levels must be at least 1")
        if self.target_mode not in ("joint", "alpha-only"):
            raise ValueError(f"unknown target_mode '{self.target_mode}'")


def compute_reward(lat: LatencyBreakdown, violations: int,
                   t_norm_s: float, penalty_weight: float = 1.0) -> float:
    """Normalized negative latency minus the overload penalty."""
    if t_norm_s <= 0:
        raise ValueError("t_norm_s must be positive")
    return -lat.total_s / t_norm_s - penalty_weight * violations


class PreMigrationEnv:
    """Gym-style episodic interface: reset(seed) / step(action)."""

    def __init__(self, scenario: Scenario, cfg: EnvConfig | None = None):
        scenario.validate()
        self.scenario = scenario
        self.cfg = cfg or EnvConfig()
        self.alpha_grid = [i / self.cfg.alpha_levels for i in range(self.cfg.alpha_levels)]
        self.world: WorldState | None = None
        self.t_norm_s: float = 1.0
        self.controllers: list[UavController] = []
        self._steps_taken = 0

    # ------------------------------------------------------------ observation

    @property
    def obs_dim(self) -> int:
        n = self.scenario.num_nodes
        u = self.scenario.uav.count
        return 2 + 2 + n + n + n + 2 * u + 1

    def observe(self) -> np.ndarray:
        world = self._require_world()
        sc = self.scenario
        ex, ey = sc.extent_m()
        veh = world.vehicle
        speed = max(sc.vehicle.speed_mps, 1.0)
        parts = [veh.pos.x / ex, veh.pos.y / ey,
                 veh.velocity_mps[0] / speed, veh.velocity_mps[1] / speed]
        serving = [0.0] * sc.num_nodes
        serving[world.serving_node] = 1.0
        parts.extend(serving)
        for node in world.nodes:
            parts.append(node.workload_cycles / node.workload_max)
        for node in world.nodes:
            in_range = ground_distance(node.pos, veh.pos) <= node.coverage_radius_m
            parts.append(1.0 if in_range else 0.0)
        for node in world.uavs:
            parts.append(node.pos.x / ex)
            parts.append(node.pos.y / ey)
        parts.append(world.time_slot / sc.t_max)
        return np.asarray(parts, dtype=np.float64)

    # ----------------------------------------------------------- action space

    def eligible_targets(self) -> list[int]:
        """Non-serving nodes the task may pre-migrate to, sorted by id."""
        world = self._require_world()
        serving = world.node(world.serving_node)
        out = []
        for node in world.nodes:
            if node.id == serving.id:
                continue
            if node.is_uav:
                if not self.cfg.uav_targets:
                    continue
                radius = self.cfg.uav_target_radius_m
                if radius is not None and ground_distance(node.pos, serving.pos) > radius:
                    continue
            out.append(node.id)
        if self.cfg.target_mode == "alpha-only":
            rsus = [nid for nid in out if world.node(nid).is_rsu]
            if not rsus:
                return []
            nearest = min(rsus, key=lambda nid: (ground_distance(world.node(nid).pos,
                                                                 world.vehicle.pos), nid))
            return [nearest]
        return out

    def action_space(self) -> list[MigrationAction]:
        """Current legal actions: one no-pre-migration entry, then the
        cartesian product of eligible targets and nonzero ratio bins,
        ordered by (target id, ratio bin)."""
        world = self._require_world()
        actions = [MigrationAction(target_node=world.serving_node, alpha_bin=0)]
        for target in self.eligible_targets():
            for b in range(1, self.cfg.alpha_levels):
                actions.append(MigrationAction(target_node=target, alpha_bin=b))
        return actions

    @property
    def num_actions(self) -> int:
        """Action-space cardinality; before reset it is derived structurally
        (constant over an episode unless uav_target_radius_m is finite)."""
        if self.world is not None:
            return len(self.action_space())
        levels = self.cfg.alpha_levels
        if self.cfg.target_mode == "alpha-only":
            return 1 + (levels - 1 if self.scenario.num_rsus > 1 else 0)
        eligible = self.scenario.num_rsus - 1
        if self.cfg.uav_targets and self.cfg.uav_target_radius_m is None:
            eligible += self.scenario.uav.count
        return 1 + eligible * (levels - 1)

    # ---------------------------------------------------------------- episode

    def reset(self, seed: int = 0) -> np.ndarray:
        self.world = make_world(self.scenario, seed)
        self._steps_taken = 0
        self.controllers = []
        if self.cfg.uav_mode != "none":
            for uav in self.world.uavs:
                self.controllers.append(make_controller(
                    self.cfg.uav_mode, self.scenario, uav.id,
                    weights=self.cfg.durp_weights,
                    strict_paper=self.cfg.strict_paper,
                    goal_hysteresis=self.cfg.goal_hysteresis,
                ))
        self.t_norm_s = self.cfg.t_norm_s or self._median_single_node_latency()
        return self.observe()

    def _median_single_node_latency(self) -> float:
        """Median over RSUs of the no-pre-migration latency at reset."""
        world = self._require_world()
        task = self._task()
        values = []
        for node in world.rsus:
            lat = total_latency(task, node, node, world.vehicle,
                                uplink_s=self.scenario.uplink_latency_s)
            values.append(lat.total_s)
        med = float(np.median(values))
        return med if med > 0 else 1.0

    def _task(self, alpha: float = 0.0) -> TaskSpec:
        return TaskSpec(
            task_size_bits=self.scenario.task.size_bits,
            result_size_bits=self.scenario.task.result_bits,
            premigrated_bits=alpha * self.scenario.task.size_bits,
        )

    def resolve_action(self, action: "MigrationAction | int") -> MigrationAction:
        space = self.action_space()
        if isinstance(action, (int, np.integer)):
            if not 0 <= int(action) < len(space):
                raise ActionError(f"action index {action} outside 0..{len(space) - 1}")
            return space[int(action)]
        if action not in space:
            raise ActionError(f"{action} is not a legal action in the current state")
        return action

    def action_latency(self, action: "MigrationAction | int") -> LatencyBreakdown:
        """Latency breakdown the given action would incur now (no stepping)."""
        world = self._require_world()
        act = self.resolve_action(action)
        serving = world.node(world.serving_node)
        target = world.node(act.target_node)
        task = self._task(self.alpha_grid[act.alpha_bin])
        return total_latency(task, serving, target, world.vehicle,
                             uplink_s=self.scenario.uplink_latency_s)

    def step(self, action: "MigrationAction | int") -> tuple[np.ndarray, float, bool, dict]:
        world = self._require_world()
        act = self.resolve_action(action)
        lat = self.action_latency(act)

        serving = world.node(world.serving_node)
        target = world.node(act.target_node)
        task = self._task(self.alpha_grid[act.alpha_bin])
        f_v = world.vehicle.cycles_per_bit
        assignments = {serving.id: (task.task_size_bits - task.premigrated_bits) * f_v}
        assignments[target.id] = assignments.get(target.id, 0.0) + task.premigrated_bits * f_v

        violations = 0
        for node in {serving.id, target.id}:
            n = world.node(node)
            if n.workload_cycles + assignments.get(node, 0.0) > n.workload_max:
                violations += 1

        reward = compute_reward(lat, violations, self.t_norm_s, self.cfg.penalty_weight)

        self._steps_taken += 1
        done = world.time_slot >= self.scenario.t_max
        if not done:
            slot = world.time_slot
            self.world = step_world(world, assignments)
            for controller in self.controllers:
                controller.step(self.world, slot)
        obs = self.observe()
        info = {
            "latency": lat,
            "violations": violations,
            "action": act,
            "world": self.world,
            "time_slot": self.world.time_slot,
        }
        return obs, reward, done, info

    # ------------------------------------------------------------------ misc

    def serving_downlink_rate(self) -> float:
        world = self._require_world()
        return downlink_rate(world.node(world.serving_node), world.vehicle)

    def _require_world(self) -> WorldState:
        if self.world is None:
            raise RuntimeError("call reset() before interacting with the environment")
        return self.world
