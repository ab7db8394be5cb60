"""Diversity comparison and curve ablation over a scenario."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import stats

from .config import DIVERSITY_LEVELS, ScenarioConfig
from .curves import build_bezier_path, build_reach_path
from .metrics import Cube, as_points, bounding_cube, coverage, diversity_summary, max_discrete_curvature
from .sampler import WorkspaceBox, _stream, episode_seed, generate_baseline, sample_start_pose

TIE_TOL = 1e-9


@dataclass
class DiversityComparison:
    resolution: int
    fixed_cube: bool
    count: int
    seed: int
    ratios: dict[str, float]
    reports: dict
    cube: Cube | None
    xy: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    @property
    def ordered(self) -> bool:
        """True when coverage strictly increases low < middle < high."""
        r = self.ratios
        return r["high"] > r["middle"] > r["low"]

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "fixed_cube": self.fixed_cube,
            "count": self.count,
            "seed": self.seed,
            "ratios": self.ratios,
            "ordered_high_gt_middle_gt_low": self.ordered,
            "reports": self.reports,
            "cube": None if self.cube is None else self.cube.to_dict(),
        }


def compare_diversity(
    config: ScenarioConfig,
    count: int | None = None,
    seed: int | None = None,
    resolution: int | None = None,
    fixed_cube: bool = True,
    levels: Iterable[str] = DIVERSITY_LEVELS,
) -> DiversityComparison:
    """Coverage of the low / middle / high baselines on one scenario."""
    count = config.episodes if count is None else count
    seed = config.master_seed if seed is None else seed
    resolution = config.coverage_resolution if resolution is None else resolution
    field_ = config.build_field()
    sets = {lv: generate_baseline(lv, config, count, seed, field_) for lv in levels}
    cube = bounding_cube([t for ts in sets.values() for t in ts]) if fixed_cube else None
    reports = {lv: coverage(ts, resolution, cube) for lv, ts in sets.items()}
    return DiversityComparison(
        resolution=resolution,
        fixed_cube=fixed_cube,
        count=count,
        seed=seed,
        ratios={lv: r.ratio for lv, r in reports.items()},
        reports={lv: r.to_dict() for lv, r in reports.items()},
        cube=cube,
        xy={lv: np.vstack([as_points(t) for t in ts])[:, :2] for lv, ts in sets.items()},
    )


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = successes / n
    den = 1 + z**2 / n
    mid = (p + z**2 / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n * n)) / den
    return float(mid - half), float(mid + half)


@dataclass
class CurveAblation:
    rows: list[dict]
    fraction: float
    interval: tuple[float, float]
    beta: float
    half_angle: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "pairs": len(self.rows),
            "fraction_cycloid_le_bezier": self.fraction,
            "ci95": list(self.interval),
            "beta_m": self.beta,
            "cone_half_angle_rad": self.half_angle,
            "path_samples": self.samples,
            "rows": self.rows,
        }


def curve_ablation(config: ScenarioConfig, seeds: int = 100, master_seed: int | None = None) -> CurveAblation:
    """Max curvature and length of cycloid and Bezier paths on shared geometry.

    Geometry ``i`` is the start position sampled for episode ``i``. Pairs
    whose curvatures agree within ``TIE_TOL`` (straight lines) count as ties,
    and ties count toward the cycloid.
    """
    master = config.master_seed if master_seed is None else master_seed
    field_ = config.build_field()
    box = WorkspaceBox.from_config(config)
    rows = []
    for i in range(seeds):
        seed = episode_seed(master, i)
        start = sample_start_pose(box, field_, _stream(seed, 0))
        cyc = build_reach_path(field_.cone, start.position, config.path_samples)
        bez = build_bezier_path(field_.cone, start.position, config.path_samples)
        kc = max_discrete_curvature(cyc)
        kb = max_discrete_curvature(bez)
        tie = abs(kc - kb) <= TIE_TOL
        rows.append(
            {
                "index": i,
                "seed": seed,
                "start": start.position.tolist(),
                "cycloid_max_curvature": kc,
                "bezier_max_curvature": kb,
                "cycloid_length": cyc.length,
                "bezier_length": bez.length,
                "cycloid_le_bezier": bool(tie or kc <= kb),
                "tie": bool(tie),
            }
        )
    wins = sum(r["cycloid_le_bezier"] for r in rows)
    return CurveAblation(
        rows,
        wins / len(rows) if rows else float("nan"),
        wilson_interval(wins, len(rows)),
        config.beta_m,
        config.cone_half_angle_rad,
        config.path_samples,
    )


def trajectories_from_records(records: Iterable) -> list[np.ndarray]:
    """Rebuild waypoint polylines from decoded dataset records.

    Each episode starts at its first observation; positions follow by
    accumulating the real (unpadded) action deltas of consecutive chunks.
    Requires chunks to tile the trajectory, i.e. stride equal to chunk size.
    """
    episodes: dict[int, list] = {}
    for rec in records:
        episodes.setdefault(rec.observation.episode, []).append(rec)
    out = []
    for ep in sorted(episodes):
        recs = sorted(episodes[ep], key=lambda r: r.observation.step)
        start = recs[0].observation.pose.position
        deltas = [r.chunk.dp[: r.chunk.n_real] for r in recs]
        dp = np.vstack(deltas) if deltas else np.zeros((0, 3))
        out.append(np.vstack([start, start + np.cumsum(dp, axis=0)]))
    return out


def summarize(trajs) -> dict:
    return diversity_summary(trajs).to_dict()
