"""Reach paths from a start position to the cone apex.

Inside the cone the path is a half-cycloid in the plane through the goal,
the start and the cone axis. Outside the cone the start is first carried
along the axis onto the cone surface. A cubic Bezier alternative is kept for
curve ablations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import ConeField, is_inside_cone, project_onto_cone

CURVE_TYPES = ("cycloid", "bezier")
DEFAULT_SAMPLES = 200
BEZIER_HANDLE = 0.4
# last parameter interval is halved until the final chord is this well aligned
_TERMINAL_ALIGN = 1e-9
_MAX_REFINE = 60


@dataclass(frozen=True)
class PlanarCurve:
    """Half-cycloid in (axial, radial) coordinates measured from the goal."""

    a0: float
    r0: float

    @property
    def mu(self) -> float:
        return self.a0 / np.pi

    @property
    def nu(self) -> float:
        return self.r0 / 2.0

    def speed(self, t):
        t = np.asarray(t, dtype=float)
        return np.hypot(self.mu * (1.0 - np.cos(t)), self.nu * np.sin(t))


def cycloid_position(curve: PlanarCurve, t):
    """Remaining (axial, radial) offset to the goal at parameter ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > np.pi) or not np.all(np.isfinite(t)):
        raise ValueError("cycloid parameter must lie in [0, pi]")
    a = curve.a0 - curve.mu * (t - np.sin(t))
    r = curve.r0 - curve.nu * (1.0 - np.cos(t))
    if a.ndim == 0:
        return float(a), float(r)
    return a, r


@dataclass(frozen=True)
class Path3D:
    points: np.ndarray
    # index of the first point of the curved part (projection point for outside starts)
    curve_start: int = 0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise ValueError("path needs at least two 3D points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def arc_length(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)


def _parameter_grid(samples: int, lo: float, hi: float, misalign_per_unit: float, end_speed: float, scale: float) -> np.ndarray:
    """Uniform grid on [lo, hi] with the last interval halved geometrically.

    ``misalign_per_unit`` bounds the angle between the final chord and the end
    tangent per unit of parameter step. Halving stops once that angle is below
    ``_TERMINAL_ALIGN`` or once the chord (``end_speed`` per unit parameter)
    gets so short that rounding of coordinates of size ``scale`` dominates.
    """
    grid = np.linspace(lo, hi, samples)
    h = grid[-1] - grid[-2]
    if misalign_per_unit * h <= _TERMINAL_ALIGN or end_speed <= 0:
        return grid
    target = _TERMINAL_ALIGN / misalign_per_unit
    rounding = np.sqrt(np.finfo(float).eps * max(scale, 1e-300) / (end_speed * misalign_per_unit))
    step = max(target, rounding)
    if step >= h:
        return grid
    depth = min(int(np.ceil(np.log2(h / step))), _MAX_REFINE)
    extra = hi - h * 0.5 ** np.arange(1, depth + 1)
    return np.concatenate([grid[:-1], extra, [hi]])


def _radial_direction(field: ConeField, p) -> np.ndarray | None:
    d = np.asarray(p, dtype=float) - field.goal
    radial = d - (field.axis @ d) * field.axis
    n = np.linalg.norm(radial)
    return None if n == 0.0 else radial / n


def _cycloid_points(field: ConeField, p_start, samples: int) -> np.ndarray:
    a0, r0 = field.decompose(p_start)
    e_r = _radial_direction(field, p_start)
    if e_r is None or r0 == 0.0:
        r0, e_r = 0.0, np.zeros(3)
    curve = PlanarCurve(a0, r0)
    # final chord misalignment ~ (pi / 8) * (r0 / a0) * step, chord ~ (2 a0 / pi) * step
    scale = float(np.abs(field.goal).max() + abs(a0) + r0)
    t = _parameter_grid(samples, 0.0, np.pi, np.pi / 8.0 * r0 / a0, 2.0 * a0 / np.pi, scale)
    a, r = cycloid_position(curve, t)
    pts = field.goal + a[:, None] * field.axis + r[:, None] * e_r
    pts[0] = p_start
    pts[-1] = field.goal
    return pts


def build_reach_path(field: ConeField, p_q, samples: int = DEFAULT_SAMPLES) -> Path3D:
    """Cycloid reach path from ``p_q`` to the cone apex.

    Raises:
        DegenerateStartError: start on the negative axis.
        ValueError: ``samples < 2`` or start at the goal.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    p_q = np.asarray(p_q, dtype=float)
    if np.linalg.norm(p_q - field.goal) == 0.0:
        raise ValueError("start coincides with the goal")
    if is_inside_cone(field, p_q):
        return Path3D(_cycloid_points(field, p_q, samples))
    p_proj = project_onto_cone(field, p_q)
    pts = _cycloid_points(field, p_proj, samples)
    return Path3D(np.vstack([p_q, pts]), curve_start=1)


def bezier_points(control: np.ndarray, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)[:, None]
    c0, c1, c2, c3 = control
    m = 1.0 - s
    return m**3 * c0 + 3 * m**2 * s * c1 + 3 * m * s**2 * c2 + s**3 * c3


def bezier_controls(field: ConeField, p_q) -> np.ndarray:
    p_q = np.asarray(p_q, dtype=float)
    span = field.goal - p_q
    dist = np.linalg.norm(span)
    return np.array(
        [
            p_q,
            p_q + BEZIER_HANDLE * span,
            field.goal + BEZIER_HANDLE * dist * field.axis,
            field.goal,
        ]
    )


def build_bezier_path(field: ConeField, p_q, samples: int = DEFAULT_SAMPLES) -> Path3D:
    """Cubic Bezier from ``p_q`` to the goal, arriving along the cone axis."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    p_q = np.asarray(p_q, dtype=float)
    dist = np.linalg.norm(p_q - field.goal)
    if dist == 0.0:
        raise ValueError("start coincides with the goal")
    ctrl = bezier_controls(field, p_q)
    # end curvature ~2.5 r / dist^2 and end speed 1.2 dist give ~1.5 r / dist per unit step
    _, r = field.decompose(p_q)
    scale = float(np.abs(field.goal).max() + dist)
    s = _parameter_grid(samples, 0.0, 1.0, 1.5 * r / dist, 1.2 * dist, scale)
    pts = bezier_points(ctrl, s)
    pts[0] = p_q
    pts[-1] = field.goal
    return Path3D(pts)


def build_path(field: ConeField, p_q, curve_type: str = "cycloid", samples: int = DEFAULT_SAMPLES) -> Path3D:
    if curve_type == "cycloid":
        return build_reach_path(field, p_q, samples)
    if curve_type == "bezier":
        return build_bezier_path(field, p_q, samples)
    raise ValueError(f"unknown curve type {curve_type!r}; expected one of {CURVE_TYPES}")
