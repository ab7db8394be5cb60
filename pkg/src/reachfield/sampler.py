"""Episode generation: random start poses rolled out through the field.

Each episode ``i`` draws from its own generator seeded by
``episode_seed(master_seed, i)``, so episodes can be produced in any order or
in parallel with identical output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .config import ScenarioConfig
from .curves import Path3D, build_path
from .field import PreManipulationField
from .reward import RewardedEndpoint, sample_rewarded_endpoint
from .rollout import ActionChunk, Trajectory, chunk_starts, discretize, extract_chunk
from .so3 import Pose, random_unit_vector, rotation_exp

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15
_MAX_REJECTIONS = 10_000


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN64) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def episode_seed(master_seed: int, index: int) -> int:
    """64-bit per-episode seed: ``splitmix64(splitmix64(master) ^ index)``."""
    return splitmix64(splitmix64(master_seed & _MASK64) ^ (index & _MASK64))


def _stream(seed: int, purpose: int) -> np.random.Generator:
    # purpose 0: start pose, 1: reward endpoint, 2: baseline jitter
    return np.random.default_rng(np.random.SeedSequence([seed, purpose]))


@dataclass(frozen=True)
class WorkspaceBox:
    lo: np.ndarray
    hi: np.ndarray
    orientation_bound: float = 0.0

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).reshape(3)
        hi = np.array(self.hi, dtype=float).reshape(3)
        if not np.all(lo < hi):
            raise ValueError("workspace min corner must be below max corner")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, p) -> bool:
        p = np.asarray(p)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "WorkspaceBox":
        return cls(cfg.workspace_min, cfg.workspace_max, cfg.orientation_perturbation_rad)


@dataclass(frozen=True)
class Observation:
    pose: Pose
    gripper: bool
    step: int
    episode: int
    image_path: str | None = None


@dataclass(frozen=True)
class EpisodeRecord:
    observation: Observation
    chunk: ActionChunk
    reward: float | None
    provenance: dict[str, Any]


def sample_start_pose(box: WorkspaceBox, field: PreManipulationField, rng_seed) -> Pose:
    """Uniform position in ``box`` outside the gripper-close ball around the goal.

    The orientation is the goal rotation turned about a uniform random axis by
    an angle uniform in ``[0, box.orientation_bound]``.

    Raises:
        ValueError: the box lies entirely inside the exclusion ball.
    """
    rng = np.random.default_rng(rng_seed)
    eps = field.gripper_close_dist
    corners = np.array(np.meshgrid(*zip(box.lo, box.hi))).T.reshape(-1, 3)
    if np.all(np.linalg.norm(corners - field.goal, axis=1) <= eps):
        raise ValueError("workspace box lies inside the gripper-close ball; nothing to sample")
    for _ in range(_MAX_REJECTIONS):
        p = rng.uniform(box.lo, box.hi)
        if np.linalg.norm(p - field.goal) > eps:
            break
    else:
        raise ValueError("could not sample a start outside the gripper-close ball")
    axis = random_unit_vector(rng)
    angle = rng.uniform(0.0, box.orientation_bound) if box.orientation_bound > 0 else 0.0
    R = field.goal_rotation @ rotation_exp(angle * axis) if angle > 0 else field.goal_rotation
    return Pose(p, R)


def episode_records(
    traj: Trajectory,
    episode: int,
    chunk_size: int,
    chunk_stride: int,
    reward: float | None,
    provenance: dict[str, Any],
) -> list[EpisodeRecord]:
    out = []
    for k in chunk_starts(traj, chunk_stride):
        obs = Observation(traj.pose(k), bool(traj.gripper[k]), k, episode)
        out.append(EpisodeRecord(obs, extract_chunk(traj, k, chunk_size), reward, provenance))
    return out


def generate_episode(
    field: PreManipulationField,
    start: Pose,
    config: ScenarioConfig,
    episode: int = 0,
    seed: int | None = None,
    reward: RewardedEndpoint | None = None,
) -> tuple[Trajectory, list[EpisodeRecord]]:
    """Roll one start pose through the field and cut it into records.

    With ``reward`` given, the trajectory is aimed at the perturbed endpoint.
    """
    target = field if reward is None else field.with_goal(reward.sampled)
    path = build_path(target.cone, start.position, config.curve_type, config.path_samples)
    meta = {
        "seed": seed,
        "curve_type": config.curve_type,
        "diversity_level": "high",
        "beta": config.beta_m,
    }
    if reward is not None:
        meta["reward_target"] = [float(x) for x in reward.sampled]
        meta["reward_distance"] = float(reward.distance)
    traj = discretize(path, target, start.rotation, config.beta_m, metadata={**meta, "start": start})
    value = None if reward is None else reward.reward
    records = episode_records(traj, episode, config.chunk_size, config.chunk_stride, value, meta)
    return traj, records


def episode_for_index(
    config: ScenarioConfig,
    index: int,
    field: PreManipulationField | None = None,
    master_seed: int | None = None,
) -> tuple[Trajectory, list[EpisodeRecord]]:
    """Episode ``index`` of a scenario; depends only on (config, seed, index)."""
    field = config.build_field() if field is None else field
    master = config.master_seed if master_seed is None else master_seed
    seed = episode_seed(master, index)
    start = sample_start_pose(WorkspaceBox.from_config(config), field, _stream(seed, 0))
    reward = None
    if config.reward_mode != "off":
        reward = sample_rewarded_endpoint(
            field.goal, config.reward_sphere_radius_m, _stream(seed, 1), config.reward_mode
        )
    return generate_episode(field, start, config, index, seed, reward)


def _straight(field: PreManipulationField, start: Pose, config: ScenarioConfig, level: str, seed: int) -> Trajectory:
    path = Path3D([start.position, field.goal])
    meta = {"seed": seed, "curve_type": "line", "diversity_level": level, "beta": config.beta_m}
    return discretize(path, field, start.rotation, config.beta_m, metadata={**meta, "start": start})


def _jittered(traj: Trajectory, sigma: float, rng: np.random.Generator) -> Trajectory:
    if sigma == 0 or len(traj) <= 2:
        return traj
    pos = np.array(traj.positions)
    pos[1:-1] += rng.normal(scale=sigma, size=pos[1:-1].shape)
    dp = np.diff(pos, axis=0)
    return Trajectory(pos, traj.rotations, traj.gripper, dp, traj.dw, traj.beta, traj.gain, dict(traj.metadata))


def generate_baseline(
    level: str,
    config: ScenarioConfig,
    count: int,
    rng_seed: int,
    field: PreManipulationField | None = None,
) -> list[Trajectory]:
    """Trajectory sets at three diversity levels.

    ``low``: one fixed start, straight line to the goal, Gaussian waypoint
    jitter of ``config.baseline_jitter_m``. ``middle``: random starts,
    straight lines to the fixed goal. ``high``: full field rollouts.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    field = config.build_field() if field is None else field
    box = WorkspaceBox.from_config(config)
    if level == "low":
        start = sample_start_pose(box, field, _stream(episode_seed(rng_seed, 0), 0))
        base = _straight(field, start, config, "low", rng_seed)
        return [
            _jittered(base, config.baseline_jitter_m, _stream(episode_seed(rng_seed, i), 2))
            for i in range(count)
        ]
    if level == "middle":
        out = []
        for i in range(count):
            seed = episode_seed(rng_seed, i)
            start = sample_start_pose(box, field, _stream(seed, 0))
            out.append(_straight(field, start, config, "middle", seed))
        return out
    if level == "high":
        cfg = config.replace(reward_mode="off")
        return [episode_for_index(cfg, i, field, rng_seed)[0] for i in range(count)]
    raise ValueError(f"unknown diversity level {level!r}")
