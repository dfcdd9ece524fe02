"""Headless RL playtesting harness.

Trains PPO agents in defect-seeded sandbox levels to surface exploits, stuck
areas, coverage gaps, and difficulty estimates, alongside a scripted navmesh
baseline for contrast.
"""

from .env import Env, EnvConfig, env_step, observe, reward
from .level import LevelSpec, LevelError, load_builtin, load_level, parse_level
from .sim import Action, StepInfo, WorldState, raycast, reset, step

__all__ = [
    "Action",
    "Env",
    "EnvConfig",
    "LevelError",
    "LevelSpec",
    "StepInfo",
    "WorldState",
    "env_step",
    "load_builtin",
    "load_level",
    "observe",
    "parse_level",
    "raycast",
    "reset",
    "reward",
    "step",
]
