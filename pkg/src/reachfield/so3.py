"""Rotation and pose math on SO(3).

Rotations are plain ``(3, 3)`` numpy arrays and axis-angle vectors are plain
``(3,)`` arrays. The exp/log maps also accept stacked inputs of shape
``(..., 3)`` / ``(..., 3, 3)`` so that rollouts can be evaluated in one shot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SMALL_ANGLE = 1e-6
DRIFT_TOL = 1e-8
# below this |sin(angle)| the log axis is read from the symmetric part
_NEAR_PI = 1e-3


def unit(v) -> np.ndarray:
    """Return ``v`` scaled to unit Euclidean norm."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError(f"cannot normalize vector {v!r}")
    return v / n


def hat(w) -> np.ndarray:
    """Skew-symmetric matrix of ``w`` (stacked inputs allowed)."""
    w = np.asarray(w, dtype=float)
    W = np.zeros(w.shape[:-1] + (3, 3))
    W[..., 0, 1] = -w[..., 2]
    W[..., 0, 2] = w[..., 1]
    W[..., 1, 0] = w[..., 2]
    W[..., 1, 2] = -w[..., 0]
    W[..., 2, 0] = -w[..., 1]
    W[..., 2, 1] = w[..., 0]
    return W


def vee(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return np.stack([W[..., 2, 1], W[..., 0, 2], W[..., 1, 0]], axis=-1)


def rotation_exp(w) -> np.ndarray:
    """Rodrigues' formula: axis-angle vector(s) to rotation matrix(es)."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    W = hat(w)
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a * W + b * (W @ W)


def _canonical_axis(k: np.ndarray) -> np.ndarray:
    # first nonzero component positive
    for c in k:
        if abs(c) > 1e-12:
            return k if c > 0 else -k
    return k


def _log_single(R: np.ndarray) -> np.ndarray:
    v = 0.5 * vee(R - R.T)  # sin(angle) * axis
    s = np.linalg.norm(v)
    c = 0.5 * (np.trace(R) - 1.0)
    theta = np.arctan2(s, c)
    if theta < SMALL_ANGLE:
        return v * (1.0 + theta**2 / 6.0)
    if np.pi - theta > _NEAR_PI:
        return v * (theta / s)
    # near pi: (R + R^T)/2 - cos(angle) I = (1 - cos(angle)) k k^T
    B = 0.5 * (R + R.T) - c * np.eye(3)
    j = int(np.argmax(np.diag(B)))
    k = unit(B[:, j])
    if s > 1e-14:
        if k @ v < 0:
            k = -k
    else:
        k = _canonical_axis(k)
    return theta * k


def rotation_log(R) -> np.ndarray:
    """Canonical axis-angle vector(s) with angle in ``[0, pi]``.

    At exactly ``pi`` the axis sign is fixed so that its first nonzero
    component is positive.
    """
    R = np.asarray(R, dtype=float)
    if R.shape == (3, 3):
        return _log_single(R)
    flat = R.reshape(-1, 3, 3)
    return np.array([_log_single(r) for r in flat]).reshape(R.shape[:-2] + (3,))


def rotation_angle(R) -> float:
    """Geodesic angle of ``R`` from the identity."""
    R = np.asarray(R, dtype=float)
    s = np.linalg.norm(0.5 * vee(R - R.T))
    c = 0.5 * (np.trace(R) - 1.0)
    return float(np.arctan2(s, c))


def orthonormalize(R) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def as_rotation(R) -> np.ndarray:
    """Validate a rotation matrix, re-orthonormalizing small drift.

    Raises:
        ValueError: if ``R`` is not 3x3 or is not close to a proper rotation.
    """
    R = np.array(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise ValueError("rotation must be a finite 3x3 matrix")
    err = np.abs(R.T @ R - np.eye(3)).max()
    if err > 1e-3 or np.linalg.det(R) < 0:
        raise ValueError("matrix is not a proper rotation")
    if err > DRIFT_TOL or abs(np.linalg.det(R) - 1.0) > DRIFT_TOL:
        R = orthonormalize(R)
    R.setflags(write=False)
    return R


def is_rotation(R, tol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=float)
    return bool(
        R.shape == (3, 3)
        and np.abs(R.T @ R - np.eye(3)).max() <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform random rotation (via a random unit quaternion)."""
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_unit_vector(rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (3,) if size is None else (size, 3)
    v = rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def axial_radial_decompose(p_q, p_g, u) -> tuple[float, float]:
    """Split ``p_q - p_g`` into signed axial length and radial distance."""
    d = np.asarray(p_q, dtype=float) - np.asarray(p_g, dtype=float)
    u = np.asarray(u, dtype=float)
    a = float(u @ d)
    r = float(np.linalg.norm(d - a * u))
    return a, r


@dataclass(frozen=True)
class Pose:
    """End-effector position (meters) and orientation."""

    position: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        p = np.array(self.position, dtype=float).reshape(3)
        p.setflags(write=False)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "rotation", as_rotation(self.rotation))

    @classmethod
    def from_axis_angle(cls, position, w) -> "Pose":
        return cls(position, rotation_exp(w))

    def axis_angle(self) -> np.ndarray:
        return rotation_log(self.rotation)

    def compose(self, other: "Pose") -> "Pose":
        """``self * other`` with ``other`` expressed in this pose's frame."""
        return Pose(
            self.position + self.rotation @ other.position,
            self.rotation @ other.rotation,
        )

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(-Rt @ self.position, Rt)
