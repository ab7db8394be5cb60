"""Pre-manipulation field: cone field for position, spherical field for orientation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .so3 import (
    as_rotation,
    axial_radial_decompose,
    rotation_angle,
    rotation_exp,
    rotation_log,
    unit,
)

# slack on the cone inequality so projected points classify as inside
CONE_TOL = 1e-12
DEFAULT_GRIPPER_CLOSE_DIST = 0.01
ORIENTATION_TOL = 0.01


class DegenerateStartError(ValueError):
    """Start position lies on the negative cone axis; no projection exists."""


@dataclass(frozen=True)
class ConeField:
    goal: np.ndarray
    axis: np.ndarray
    half_angle: float

    def __post_init__(self):
        goal = np.array(self.goal, dtype=float).reshape(3)
        axis = unit(np.array(self.axis, dtype=float).reshape(3))
        goal.setflags(write=False)
        axis.setflags(write=False)
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "axis", axis)
        if not 0.0 < self.half_angle < np.pi / 2:
            raise ValueError(f"cone half-angle must lie in (0, pi/2), got {self.half_angle}")
        object.__setattr__(self, "half_angle", float(self.half_angle))

    @property
    def slope(self) -> float:
        return float(np.tan(self.half_angle))

    def decompose(self, p) -> tuple[float, float]:
        return axial_radial_decompose(p, self.goal, self.axis)

    def with_goal(self, goal) -> "ConeField":
        return replace(self, goal=goal)


@dataclass(frozen=True)
class SphericalField:
    """Goal orientation plus contraction gain.

    ``gain=None`` means the gain is chosen per trajectory by :func:`auto_gain`.
    """

    goal_rotation: np.ndarray
    gain: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "goal_rotation", as_rotation(self.goal_rotation))
        if self.gain is not None:
            if not 0.0 < self.gain <= 1.0:
                raise ValueError(f"gain must lie in (0, 1], got {self.gain}")
            object.__setattr__(self, "gain", float(self.gain))


@dataclass(frozen=True)
class PreManipulationField:
    cone: ConeField
    sphere: SphericalField
    gripper_close_dist: float = DEFAULT_GRIPPER_CLOSE_DIST

    def __post_init__(self):
        if not self.gripper_close_dist > 0:
            raise ValueError("gripper_close_dist must be positive")

    @property
    def goal(self) -> np.ndarray:
        return self.cone.goal

    @property
    def goal_rotation(self) -> np.ndarray:
        return self.sphere.goal_rotation

    def with_goal(self, goal) -> "PreManipulationField":
        return replace(self, cone=self.cone.with_goal(goal))


def is_inside_cone(field: ConeField, p_q) -> bool:
    """Cone membership; the surface and the apex count as inside."""
    a, r = field.decompose(p_q)
    return a >= -CONE_TOL and r <= field.slope * a + CONE_TOL


def project_onto_cone(field: ConeField, p_q) -> np.ndarray:
    """Slide ``p_q`` along the cone axis until it meets the cone surface.

    The radial offset is kept; only the axial coordinate changes, to
    ``r / tan(half_angle)``.
    """
    p_q = np.asarray(p_q, dtype=float)
    a, r = field.decompose(p_q)
    if r <= CONE_TOL * max(1.0, abs(a)):
        if a >= 0:
            return p_q.copy()
        raise DegenerateStartError(
            f"start {p_q.tolist()} lies on the negative cone axis; projection undefined"
        )
    return p_q + (r / field.slope - a) * field.axis


def orientation_step(field: SphericalField, R_q, gain: float | None = None) -> np.ndarray:
    """One corrective step ``R_q * exp(-gain * log(R_g^T R_q))``.

    The residual angle to the goal shrinks by exactly ``1 - gain``.
    """
    k = field.gain if gain is None else gain
    if k is None:
        raise ValueError("field has automatic gain; pass gain explicitly")
    R_q = np.asarray(R_q, dtype=float)
    w = rotation_log(field.goal_rotation.T @ R_q)
    return R_q @ rotation_exp(-k * w)


def auto_gain(angle0: float, n_steps: int, tol: float = ORIENTATION_TOL) -> float:
    """Gain that brings a residual of ``angle0`` below ``tol`` in ``n_steps``."""
    if n_steps < 1 or angle0 <= tol:
        return 1.0
    k = 1.0 - (tol / angle0) ** (1.0 / n_steps)
    return float(min(max(k, np.finfo(float).tiny), 1.0))


def residual_angle(field: SphericalField, R_q) -> float:
    return rotation_angle(field.goal_rotation.T @ np.asarray(R_q, dtype=float))
