"""Trajectory-set analysis: voxel coverage, discrete curvature, spread."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RESOLUTION = 16
STANDARD_RESOLUTIONS = (8, 16, 32)
# edge used when every point coincides
_MIN_EDGE = 1e-9
_COLLINEAR = 1e-12


def as_points(traj) -> np.ndarray:
    """Point array of a Trajectory, Path3D or raw ``(n, 3)`` array."""
    for attr in ("positions", "points"):
        if hasattr(traj, attr):
            return np.asarray(getattr(traj, attr), dtype=float)
    pts = np.asarray(traj, dtype=float)
    return pts.reshape(-1, 3)


@dataclass(frozen=True)
class Cube:
    origin: np.ndarray
    edge: float

    @property
    def center(self) -> np.ndarray:
        return self.origin + 0.5 * self.edge

    def to_dict(self) -> dict:
        return {"origin": [float(x) for x in self.origin], "edge": float(self.edge)}


def bounding_cube(trajs: Iterable) -> Cube:
    """Smallest axis-aligned cube centred on the tight bounding box."""
    pts = np.vstack([as_points(t) for t in trajs])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    edge = max(float((hi - lo).max()), _MIN_EDGE)
    return Cube(0.5 * (lo + hi) - 0.5 * edge, edge)


@dataclass
class VoxelGrid:
    cube: Cube
    n: int
    occupied: np.ndarray  # bool (n, n, n)

    @classmethod
    def empty(cls, cube: Cube, n: int) -> "VoxelGrid":
        if n < 1:
            raise ValueError("resolution must be >= 1")
        return cls(cube, n, np.zeros((n, n, n), dtype=bool))

    @property
    def voxel_size(self) -> float:
        return self.cube.edge / self.n

    def index_of(self, p) -> tuple[int, int, int]:
        g = (np.asarray(p, dtype=float) - self.cube.origin) / self.voxel_size
        i = np.clip(np.floor(g).astype(int), 0, self.n - 1)
        return int(i[0]), int(i[1]), int(i[2])

    def _clip(self, a: np.ndarray, b: np.ndarray) -> tuple[float, float] | None:
        # Liang-Barsky clip of a + s (b - a), s in [0, 1], against the cube
        lo, hi = self.cube.origin, self.cube.origin + self.cube.edge
        s0, s1 = 0.0, 1.0
        d = b - a
        for k in range(3):
            if d[k] == 0.0:
                if a[k] < lo[k] or a[k] > hi[k]:
                    return None
                continue
            t_lo = (lo[k] - a[k]) / d[k]
            t_hi = (hi[k] - a[k]) / d[k]
            if t_lo > t_hi:
                t_lo, t_hi = t_hi, t_lo
            s0, s1 = max(s0, t_lo), min(s1, t_hi)
            if s0 > s1:
                return None
        return s0, s1

    def mark_point(self, p) -> None:
        p = np.asarray(p, dtype=float)
        lo, hi = self.cube.origin, self.cube.origin + self.cube.edge
        if np.all(p >= lo) and np.all(p <= hi):
            self.occupied[self.index_of(p)] = True

    def mark_segment(self, a, b) -> None:
        """Mark every voxel the segment ``a -> b`` passes through (3D DDA)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        clip = self._clip(a, b)
        if clip is None:
            return
        s0, s1 = clip
        d = b - a
        length = s1 - s0
        h = self.voxel_size
        g0 = (a + s0 * d - self.cube.origin) / h
        g1 = (a + s1 * d - self.cube.origin) / h
        n = self.n
        idx = [min(max(int(math.floor(g0[k])), 0), n - 1) for k in range(3)]
        end = [min(max(int(math.floor(g1[k])), 0), n - 1) for k in range(3)]
        occ = self.occupied
        occ[idx[0], idx[1], idx[2]] = True
        if idx == end or length == 0.0:
            return
        step = [0, 0, 0]
        t_max = [math.inf] * 3
        t_delta = [math.inf] * 3
        gd = (g1 - g0).tolist()
        for k in range(3):
            if gd[k] > 0:
                step[k] = 1
                t_max[k] = (idx[k] + 1 - g0[k]) / gd[k]
                t_delta[k] = 1.0 / gd[k]
            elif gd[k] < 0:
                step[k] = -1
                t_max[k] = (idx[k] - g0[k]) / gd[k]
                t_delta[k] = -1.0 / gd[k]
        # each step crosses one voxel face; total crossings are bounded
        for _ in range(3 * n + 3):
            k = min(range(3), key=t_max.__getitem__)
            if t_max[k] > 1.0:
                break
            idx[k] += step[k]
            if not 0 <= idx[k] < n:
                break
            t_max[k] += t_delta[k]
            occ[idx[0], idx[1], idx[2]] = True
            if idx == end:
                break

    def mark_polyline(self, pts: np.ndarray) -> None:
        pts = np.asarray(pts, dtype=float)
        if len(pts) == 1:
            self.mark_point(pts[0])
            return
        for a, b in zip(pts[:-1], pts[1:]):
            self.mark_segment(a, b)

    @property
    def count(self) -> int:
        return int(self.occupied.sum())


@dataclass(frozen=True)
class CoverageReport:
    total: int  # N
    traversed: int  # N'
    ratio: float
    resolution: int
    cube: Cube

    def to_dict(self) -> dict:
        return {
            "N": self.total,
            "N_traversed": self.traversed,
            "ratio": self.ratio,
            "resolution": self.resolution,
            "cube": self.cube.to_dict(),
        }


def coverage(trajs: Sequence, resolution: int = DEFAULT_RESOLUTION, cube: Cube | None = None) -> CoverageReport:
    """Fraction of voxels in a cube traversed by the trajectory segments.

    Without ``cube`` the minimum bounding cube of ``trajs`` is used; pass a
    shared cube to compare several sets on the same grid.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValueError("coverage needs at least one trajectory")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    cube = bounding_cube(trajs) if cube is None else cube
    grid = VoxelGrid.empty(cube, resolution)
    for t in trajs:
        grid.mark_polyline(as_points(t))
    total = resolution**3
    return CoverageReport(total, grid.count, grid.count / total, resolution, cube)


def menger_curvature(points) -> np.ndarray:
    """Menger curvature of each consecutive point triple; degenerate triples give 0."""
    p = as_points(points)
    if len(p) < 3:
        raise ValueError("curvature needs at least 3 points")
    a = p[1:-1] - p[:-2]
    b = p[2:] - p[1:-1]
    c = p[2:] - p[:-2]
    cross = np.linalg.norm(np.cross(a, b), axis=1)  # twice the triangle area
    den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1) * np.linalg.norm(c, axis=1)
    # collinear up to rounding counts as straight
    ok = (den > 0) & (cross > _COLLINEAR * np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    out = np.zeros(len(a))
    out[ok] = 2.0 * cross[ok] / den[ok]
    return out


def max_discrete_curvature(path) -> float:
    return float(menger_curvature(path).max())


@dataclass
class DiversityReport:
    count: int
    start_range: list[float]
    start_std: list[float]
    end_range: list[float]
    end_std: list[float]
    coverage: dict[int, float]
    xy: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("xy")
        d["coverage"] = {str(k): v for k, v in self.coverage.items()}
        d["xy_points"] = int(len(self.xy))
        return d

    def xy_bounds(self) -> tuple[float, float, float, float]:
        return (
            float(self.xy[:, 0].min()),
            float(self.xy[:, 0].max()),
            float(self.xy[:, 1].min()),
            float(self.xy[:, 1].max()),
        )


def diversity_summary(
    trajs: Sequence,
    resolutions: Sequence[int] = STANDARD_RESOLUTIONS,
    cube: Cube | None = None,
) -> DiversityReport:
    trajs = list(trajs)
    if not trajs:
        raise ValueError("diversity summary needs at least one trajectory")
    pts = [as_points(t) for t in trajs]
    starts = np.array([p[0] for p in pts])
    ends = np.array([p[-1] for p in pts])
    return DiversityReport(
        count=len(trajs),
        start_range=np.ptp(starts, axis=0).tolist(),
        start_std=starts.std(axis=0).tolist(),
        end_range=np.ptp(ends, axis=0).tolist(),
        end_std=ends.std(axis=0).tolist(),
        coverage={n: coverage(pts, n, cube).ratio for n in resolutions},
        xy=np.vstack(pts)[:, :2],
    )


def write_scatter_csv(path, xy: np.ndarray, label: str | None = None) -> None:
    """Write XY scatter points as CSV (``x,y`` or ``label,x,y``)."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("label,x,y\n" if label is not None else "x,y\n")
        for x, y in np.asarray(xy, dtype=float).tolist():
            f.write(f"{label},{x!r},{y!r}\n" if label is not None else f"{x!r},{y!r}\n")
