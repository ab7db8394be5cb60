"""Discretize a reach path into delta-pose actions and fixed-size chunks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np

from .curves import Path3D
from .field import PreManipulationField, auto_gain
from .so3 import Pose, rotation_exp, rotation_log

DEFAULT_BETA = 0.0025
CHUNK_SIZE = 30
# a leftover shorter than this is merged into the last full step
_ARRIVAL_TOL = 1e-9


class BetaError(ValueError):
    """Step spacing is not smaller than the path length."""


@dataclass(frozen=True)
class DeltaAction:
    dp: np.ndarray
    dw: np.ndarray
    gripper: bool  # True = close

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.dp, self.dw, [float(self.gripper)]])


@dataclass(frozen=True)
class ActionChunk:
    """``size`` consecutive actions; rows past ``n_real`` are zero-motion padding."""

    dp: np.ndarray
    dw: np.ndarray
    gripper: np.ndarray
    n_real: int

    def __len__(self) -> int:
        return len(self.dp)

    def __getitem__(self, i) -> DeltaAction:
        return DeltaAction(self.dp[i], self.dw[i], bool(self.gripper[i]))

    @property
    def actions(self) -> list[DeltaAction]:
        return [self[i] for i in range(len(self))]

    def as_array(self) -> np.ndarray:
        """``(size, 7)`` block: dp(3), dw(3), gripper(1)."""
        return np.column_stack([self.dp, self.dw, self.gripper.astype(float)])


@dataclass(frozen=True)
class Trajectory:
    """Waypoints at chord spacing ``beta`` and the actions between them.

    Action ``k`` moves waypoint ``k`` to ``k + 1``; its gripper command is the
    gripper state at waypoint ``k + 1``.
    """

    positions: np.ndarray
    rotations: np.ndarray
    gripper: np.ndarray
    dp: np.ndarray
    dw: np.ndarray
    beta: float
    gain: float
    metadata: dict[str, Any] = dc_field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def n_actions(self) -> int:
        return len(self.dp)

    @property
    def action_gripper(self) -> np.ndarray:
        return self.gripper[1:]

    def pose(self, i: int) -> Pose:
        return Pose(self.positions[i], self.rotations[i])

    @property
    def poses(self) -> list[Pose]:
        return [self.pose(i) for i in range(len(self))]

    def action(self, k: int) -> DeltaAction:
        return DeltaAction(self.dp[k], self.dw[k], bool(self.gripper[k + 1]))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.dp, axis=1).sum())


def _sphere_exit(a: np.ndarray, b: np.ndarray, c: np.ndarray, radius: float) -> float:
    """Largest ``s`` in [0, 1] with ``|a + s (b - a) - c| = radius``."""
    d = b - a
    f = a - c
    A = d @ d
    B = 2.0 * (f @ d)
    C = f @ f - radius * radius
    disc = max(B * B - 4.0 * A * C, 0.0)
    s = (-B + math.sqrt(disc)) / (2.0 * A)
    return min(max(s, 0.0), 1.0)


def chord_waypoints(points: np.ndarray, beta: float) -> np.ndarray:
    """Walk a polyline in chord steps of exactly ``beta``.

    The final waypoint is the polyline end; the step into it is the only one
    that may be shorter than ``beta``.
    """
    points = np.asarray(points, dtype=float)
    end = points[-1]
    out = [points[0]]
    cur = points[0]
    seg = 0  # cur lies on segment [seg, seg + 1]
    while True:
        ahead = points[seg + 1 :]
        dist = np.linalg.norm(ahead - cur, axis=1)
        hits = np.nonzero(dist >= beta)[0]
        if len(hits) == 0:
            break
        j = seg + 1 + int(hits[0])
        a = cur if j == seg + 1 else points[j - 1]
        s = _sphere_exit(a, points[j], cur, beta)
        nxt = a + s * (points[j] - a)
        seg = j - 1
        cur = nxt
        out.append(cur)
    if np.linalg.norm(end - out[-1]) <= _ARRIVAL_TOL:
        out[-1] = end
    else:
        out.append(end)
    return np.array(out)


def orientation_schedule(field: PreManipulationField, start_R, n_steps: int) -> tuple[np.ndarray, float]:
    """Rotations for ``n_steps + 1`` waypoints under the spherical field.

    Closed form of iterating the corrective step: the residual after ``k``
    steps is ``exp((1 - gain)^k * w0)`` with ``w0`` the initial residual.
    The terminal waypoint is set to the goal rotation.
    """
    R_g = field.goal_rotation
    w0 = rotation_log(R_g.T @ np.asarray(start_R, dtype=float))
    angle0 = float(np.linalg.norm(w0))
    gain = field.sphere.gain
    if gain is None:
        gain = auto_gain(angle0, n_steps)
    scale = (1.0 - gain) ** np.arange(n_steps + 1)
    rots = R_g @ rotation_exp(scale[:, None] * w0)
    rots[0] = start_R
    rots[-1] = R_g
    return rots, gain


def discretize(
    path: Path3D,
    field: PreManipulationField,
    start_R,
    beta: float = DEFAULT_BETA,
    metadata: dict[str, Any] | None = None,
) -> Trajectory:
    """Turn a reach path into waypoints, delta actions and gripper commands.

    Raises:
        BetaError: if ``beta`` is not positive or not below the path length.
    """
    if not beta > 0:
        raise BetaError(f"beta must be positive, got {beta}")
    # within the arrival tolerance a leftover merges into the step, leaving one jump
    if beta >= path.length - _ARRIVAL_TOL:
        raise BetaError(
            f"beta={beta} m is not below the path length {path.length:.6g} m; "
            "the trajectory would be a single jump"
        )
    pos = chord_waypoints(path.points, beta)
    n_steps = len(pos) - 1
    rots, gain = orientation_schedule(field, start_R, n_steps)

    dp = np.diff(pos, axis=0)
    rel = np.swapaxes(rots[:-1], -1, -2) @ rots[1:]
    dw = rotation_log(rel)

    near = np.linalg.norm(pos - field.goal, axis=1) <= field.gripper_close_dist
    closed = np.maximum.accumulate(near)
    for arr in (pos, rots, closed, dp, dw):
        arr.setflags(write=False)
    return Trajectory(pos, rots, closed, dp, dw, float(beta), float(gain), dict(metadata or {}))


def extract_chunk(traj: Trajectory, start_index: int, size: int = CHUNK_SIZE) -> ActionChunk:
    """``size`` actions from ``start_index``, padded with zero-motion actions.

    Padding holds the last gripper command of the trajectory.

    Raises:
        IndexError: ``start_index`` is outside the action range.
    """
    n = traj.n_actions
    if not 0 <= start_index < n:
        raise IndexError(f"chunk start {start_index} outside [0, {n})")
    stop = min(start_index + size, n)
    real = stop - start_index
    dp = np.zeros((size, 3))
    dw = np.zeros((size, 3))
    grip = np.full(size, bool(traj.action_gripper[-1]))
    dp[:real] = traj.dp[start_index:stop]
    dw[:real] = traj.dw[start_index:stop]
    grip[:real] = traj.action_gripper[start_index:stop]
    return ActionChunk(dp, dw, grip, real)


def chunk_starts(traj: Trajectory, stride: int = CHUNK_SIZE) -> range:
    if stride < 1:
        raise ValueError("chunk stride must be >= 1")
    return range(0, traj.n_actions, stride)
