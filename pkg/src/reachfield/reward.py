"""Perturbed-endpoint reward labels.

A new endpoint is drawn inside a ball of radius ``R`` around the original
one, and the trajectory aimed at it is scored ``1 - d / R``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .so3 import random_unit_vector

REWARD_MODES = ("off", "uniform_reward", "uniform_volume")


class OutOfBallError(ValueError):
    pass


@dataclass(frozen=True)
class RewardedEndpoint:
    original: np.ndarray
    sampled: np.ndarray
    radius: float
    distance: float
    reward: float


def reward_of(p_o, p_n, radius: float) -> float:
    """Linear reward ``1 - |p_o - p_n| / radius``.

    Raises:
        OutOfBallError: the sampled point is farther than ``radius``.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    d = float(np.linalg.norm(np.asarray(p_n, dtype=float) - np.asarray(p_o, dtype=float)))
    # relative slack absorbs rounding of the input coordinates
    if d > radius * (1.0 + 1e-12):
        raise OutOfBallError(f"distance {d} exceeds sphere radius {radius}")
    return max(1.0 - d / radius, 0.0)


def sample_distance(rng: np.random.Generator, radius: float, mode: str = "uniform_reward") -> float:
    """Distance of the perturbed endpoint from the original.

    ``uniform_reward`` draws the distance uniformly, so rewards are uniform on
    [0, 1]. ``uniform_volume`` draws the point uniformly in the ball, which
    gives reward density proportional to ``(1 - reward)^2``.
    """
    u = rng.random()
    if mode == "uniform_reward":
        return radius * u
    if mode == "uniform_volume":
        return radius * u ** (1.0 / 3.0)
    raise ValueError(f"unknown reward mode {mode!r}")


def sample_rewarded_endpoint(p_o, radius: float, rng_seed, mode: str = "uniform_reward") -> RewardedEndpoint:
    """Draw a perturbed endpoint and its reward.

    ``rng_seed`` may be an int, a seed sequence or a ``numpy`` Generator.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(rng_seed)
    p_o = np.asarray(p_o, dtype=float)
    d = sample_distance(rng, radius, mode)
    direction = random_unit_vector(rng)
    p_n = p_o + d * direction
    return RewardedEndpoint(p_o, p_n, float(radius), d, 1.0 - d / radius)


def sample_rewards(n: int, radius: float, rng_seed, mode: str = "uniform_reward") -> np.ndarray:
    """Rewards of ``n`` endpoint draws around the origin (for distribution checks)."""
    rng = np.random.default_rng(rng_seed)
    return np.array([sample_rewarded_endpoint(np.zeros(3), radius, rng, mode).reward for _ in range(n)])
