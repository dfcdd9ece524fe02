"""Episode semantics on top of the simulation core.

Builds the 27-component normalized observation vector, computes the
incremental distance-to-goal reward, applies action repeat, and manages goal
cycling, trapping, and timeout termination.

Observation layout (all components within [-1, 1]):
  [0:3]   goal offset in the agent frame (right, up, forward) / d_max
  [3:6]   world velocity / v_max
  [6:10]  orientation quaternion (x, y, z, w)
  [10]    goal distance / d_max, in [0, 1]
  [11]    climbing flag (0/1)
  [12]    ground contact flag (0/1)
  [13]    jump cooldown remaining, fraction of full cooldown
  [14]    reset timer, fraction of episode remaining
  [15:27] 12 ray distances / ray_range, each in [0, 1]

Ray rig: 8 horizontal rays at 45-degree increments in the agent frame, 2
forward rays pitched +/-45 degrees, 1 straight up, 1 straight down, all from
the agent's body center.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import sim
from .level import LevelSpec
from .sim import Action, StepInfo, WorldState

OBS_DIM = 27
ACT_DIM = 4

_HALF_SQRT2 = math.sqrt(0.5)


@dataclass(frozen=True)
class EnvConfig:
    action_repeat: int = 3
    episode_length: int = 1000       # decisions per episode
    d_max: float | None = None       # distance normalizer; None -> bounds diagonal
    v_max: float = 20.0              # velocity normalizer, units/s
    ray_range: float = 15.0          # ray normalizer, units
    reward_scale: float | None = None  # None -> 1 / (walk_speed * dt * action_repeat)
    goal_bonus: float = 1.0

    def resolved(self, level: LevelSpec) -> "EnvConfig":
        d_max = self.d_max if self.d_max is not None else level.diagonal
        scale = self.reward_scale
        if scale is None:
            scale = 1.0 / (sim.WALK_SPEED * sim.DT * self.action_repeat)
        return replace(self, d_max=d_max, reward_scale=scale)


@dataclass(frozen=True)
class DecisionInfo:
    """StepInfo aggregated over the physics steps of one decision."""

    goal_reached: bool
    trap_entered: bool
    defect_crossed: bool
    position_before: tuple[float, float, float]
    position_after: tuple[float, float, float]
    goal_positions: tuple[tuple[float, float, float], ...]
    termination_reason: str  # "", "timeout", or "all-goals-reached"


def ray_directions(yaw: float) -> np.ndarray:
    """The fixed 12-ray rig for a given agent yaw, shape (12, 3), unit rows."""
    dirs = np.empty((12, 3), dtype=np.float64)
    for k in range(8):
        a = yaw + k * (math.pi / 4.0)
        dirs[k] = (math.sin(a), 0.0, math.cos(a))
    sin_y, cos_y = math.sin(yaw), math.cos(yaw)
    dirs[8] = (sin_y * _HALF_SQRT2, _HALF_SQRT2, cos_y * _HALF_SQRT2)
    dirs[9] = (sin_y * _HALF_SQRT2, -_HALF_SQRT2, cos_y * _HALF_SQRT2)
    dirs[10] = (0.0, 1.0, 0.0)
    dirs[11] = (0.0, -1.0, 0.0)
    return dirs


@lru_cache(maxsize=32)
def _static_ray_boxes(level: LevelSpec) -> np.ndarray:
    boxes = level.collision_boxes
    if not boxes:
        return np.empty((0, 6), dtype=np.float64)
    return np.asarray(boxes, dtype=np.float64)


def _ray_batch(boxes: np.ndarray, origin: tuple[float, float, float],
               dirs: np.ndarray, max_range: float) -> np.ndarray:
    """Slab-test a batch of rays against a batch of AABBs; (n_rays,) distances."""
    if boxes.shape[0] == 0:
        return np.full(dirs.shape[0], max_range)
    o = np.asarray(origin, dtype=np.float64)
    d = dirs.copy()
    tiny = np.abs(d) < 1e-12
    d[tiny] = 1e-12
    dinv = 1.0 / d
    t1 = (boxes[None, :, 0:3] - o) * dinv[:, None, :]
    t2 = (boxes[None, :, 3:6] - o) * dinv[:, None, :]
    near = np.minimum(t1, t2).max(axis=2)
    far = np.maximum(t1, t2).min(axis=2)
    entry = np.maximum(near, 0.0)
    hit = (far >= entry) & (entry < max_range)
    return np.where(hit, entry, max_range).min(axis=1)


def _observe_arrays(level: LevelSpec, state: WorldState, cfg: EnvConfig,
                    boxes: np.ndarray) -> np.ndarray:
    d_max = cfg.d_max
    obs = np.empty(OBS_DIM, dtype=np.float32)

    if state.goal_index < len(level.goals):
        g = level.goals[state.goal_index]
        gx, gy, gz = g.x - state.px, g.y - state.py, g.z - state.pz
    else:
        gx = gy = gz = 0.0
    sin_y, cos_y = math.sin(state.yaw), math.cos(state.yaw)
    # Agent frame: right = (cos, -sin), forward = (sin, cos).
    rel_right = gx * cos_y - gz * sin_y
    rel_fwd = gx * sin_y + gz * cos_y
    dist = math.sqrt(gx * gx + gy * gy + gz * gz)

    obs[0] = _clip1(rel_right / d_max)
    obs[1] = _clip1(gy / d_max)
    obs[2] = _clip1(rel_fwd / d_max)
    obs[3] = _clip1(state.vx / cfg.v_max)
    obs[4] = _clip1(state.vy / cfg.v_max)
    obs[5] = _clip1(state.vz / cfg.v_max)
    qx, qy, qz, qw = state.orientation
    obs[6] = qx
    obs[7] = qy
    obs[8] = qz
    obs[9] = qw
    obs[10] = min(dist / d_max, 1.0)
    obs[11] = 1.0 if state.climbing else 0.0
    obs[12] = 1.0 if state.grounded else 0.0
    obs[13] = min(state.jump_cooldown_remaining / sim.JUMP_COOLDOWN, 1.0)
    obs[14] = min(max(state.episode_steps_remaining, 0) / cfg.episode_length, 1.0)

    origin = (state.px, state.py + sim.HEIGHT * 0.5, state.pz)
    dists = _ray_batch(boxes, origin, ray_directions(state.yaw), cfg.ray_range)
    obs[15:27] = dists / cfg.ray_range
    return obs


def _clip1(v: float) -> float:
    return -1.0 if v < -1.0 else 1.0 if v > 1.0 else v


def _boxes_with_platforms(level: LevelSpec, state: WorldState) -> np.ndarray:
    static = _static_ray_boxes(level)
    if not level.platforms:
        return static
    plat = np.asarray(level.platform_boxes_at(state.platform_phase), dtype=np.float64)
    return np.vstack((static, plat))


def observe(level: LevelSpec, state: WorldState, cfg: EnvConfig) -> np.ndarray:
    """The normalized 27-component observation for a world state."""
    cfg = cfg.resolved(level)
    return _observe_arrays(level, state, cfg, _boxes_with_platforms(level, state))


def reward(level: LevelSpec, prev: WorldState, next_state: WorldState,
           info: StepInfo, cfg: EnvConfig) -> float:
    """Incremental reward for one physics step, both states on the same goal.

    Moving toward the active goal pays scale * (distance closed); moving away
    pays its exact negative. Reaching the goal adds the sparse bonus.
    """
    cfg = cfg.resolved(level)
    if prev.goal_index >= len(level.goals):
        return 0.0
    g = level.goals[prev.goal_index]
    d_prev = math.sqrt((g.x - prev.px) ** 2 + (g.y - prev.py) ** 2 + (g.z - prev.pz) ** 2)
    d_next = math.sqrt((g.x - next_state.px) ** 2 + (g.y - next_state.py) ** 2
                       + (g.z - next_state.pz) ** 2)
    r = cfg.reward_scale * (d_prev - d_next)
    if info.goal_reached:
        r += cfg.goal_bonus
    return r


def env_step(level: LevelSpec, state: WorldState, action: Action,
             cfg: EnvConfig) -> tuple[WorldState, np.ndarray, float, bool, DecisionInfo]:
    """One decision: the action held for action_repeat physics steps.

    Reward accumulates over the repeated steps; reaching a goal advances the
    goal index mid-decision. done is set on timeout or when the last goal is
    reached (the remaining repeat steps still run, keeping the frame ledger at
    exactly action_repeat physics steps per decision).
    """
    cfg = cfg.resolved(level)
    total = 0.0
    any_goal = False
    any_trap = False
    any_defect = False
    goal_positions: list[tuple[float, float, float]] = []
    pos_before = (state.px, state.py, state.pz)
    s = state
    for _ in range(cfg.action_repeat):
        s2, info = sim.step(level, s, action)
        total += reward(level, s, s2, info, cfg)
        if info.goal_reached and s.goal_index < len(level.goals):
            s2 = replace(s2, goal_index=s.goal_index + 1)
            any_goal = True
            goal_positions.append(info.position_after)
        any_trap = any_trap or info.trap_entered
        any_defect = any_defect or info.defect_crossed
        s = s2

    s = replace(s, decision_step=s.decision_step + 1,
                episode_steps_remaining=s.episode_steps_remaining - 1)
    all_goals = s.goal_index >= len(level.goals)
    timeout = s.episode_steps_remaining <= 0
    done = all_goals or timeout
    reason = "all-goals-reached" if all_goals else "timeout" if timeout else ""

    obs = _observe_arrays(level, s, cfg, _boxes_with_platforms(level, s))
    dinfo = DecisionInfo(
        goal_reached=any_goal,
        trap_entered=any_trap,
        defect_crossed=any_defect,
        position_before=pos_before,
        position_after=(s.px, s.py, s.pz),
        goal_positions=tuple(goal_positions),
        termination_reason=reason,
    )
    return s, obs, total, done, dinfo


def random_action(rng: np.random.Generator) -> Action:
    """Uniform random controller input, the random-policy baseline."""
    v = rng.uniform(-1.0, 1.0, size=4)
    return Action(forward=float(v[0]), turn=float(v[1]),
                  strafe=float(v[2]), jump=float(v[3]))


class Env:
    """Stateful episode wrapper over the pure functions, with cached geometry."""

    def __init__(self, level: LevelSpec, cfg: EnvConfig, seed: int = 0):
        self.level = level
        self.cfg = cfg.resolved(level)
        self.seed = seed
        self.state = sim.reset(level, seed, self.cfg.episode_length)

    def reset(self) -> np.ndarray:
        self.state = sim.reset(self.level, self.seed, self.cfg.episode_length)
        return _observe_arrays(self.level, self.state, self.cfg,
                               _boxes_with_platforms(self.level, self.state))

    def step(self, action: Action) -> tuple[np.ndarray, float, bool, DecisionInfo]:
        self.state, obs, r, done, info = env_step(self.level, self.state, action, self.cfg)
        return obs, r, done, info


@dataclass(frozen=True)
class ThroughputStats:
    decisions: int
    physics_steps: int
    elapsed_sec: float
    decisions_per_sec: float
    interactions_per_sec: float  # decisions_per_sec * action_repeat, by definition


def measure_throughput(level: LevelSpec, cfg: EnvConfig, n_decisions: int,
                       seed: int = 0) -> ThroughputStats:
    """Wall-clock rate of single-threaded stepping under a random policy.

    interactions_per_sec is defined as decisions_per_sec * action_repeat, so
    the two reported rates always satisfy the bookkeeping identity exactly.
    """
    env = Env(level, cfg, seed)
    rng = np.random.default_rng(seed)
    env.reset()
    t0 = time.perf_counter()
    for _ in range(n_decisions):
        _, _, done, _ = env.step(random_action(rng))
        if done:
            env.reset()
    elapsed = time.perf_counter() - t0
    dps = n_decisions / elapsed if elapsed > 0 else float("inf")
    return ThroughputStats(
        decisions=n_decisions,
        physics_steps=n_decisions * env.cfg.action_repeat,
        elapsed_sec=elapsed,
        decisions_per_sec=dps,
        interactions_per_sec=dps * env.cfg.action_repeat,
    )
