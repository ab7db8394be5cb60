"""Report figures written next to the CSV/JSON reports."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}
LEVEL_COLORS = {"low": "#9e9e9e", "middle": "#4c72b0", "high": "#dd8452"}


def new(width=4.5, height=None, **kw):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(width, height or width * golden), **kw)
    return fig, ax


def save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(RC):
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path


def coverage_bars(ratios: Mapping[str, float], path, resolution: int | None = None) -> Path:
    fig, ax = new()
    labels = list(ratios)
    vals = [100.0 * ratios[k] for k in labels]
    bars = ax.bar(labels, vals, color=[LEVEL_COLORS.get(k, "#4c72b0") for k in labels])
    for b, v in zip(bars, vals):
        ax.annotate(f"{v:.2f}%", (b.get_x() + b.get_width() / 2, v), ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("spatial coverage [%]")
    if resolution is not None:
        ax.set_title(f"voxel coverage, n = {resolution}")
    return save(fig, path)


def xy_scatter(sets: Mapping[str, np.ndarray], path, max_points: int = 20000) -> Path:
    """XY scatter of waypoints, one colour per set."""
    fig, ax = new(4.5, 4.5)
    for label, xy in sets.items():
        xy = np.asarray(xy)
        if len(xy) > max_points:
            xy = xy[:: int(np.ceil(len(xy) / max_points))]
        ax.scatter(xy[:, 0], xy[:, 1], s=1.5, alpha=0.5, label=label, color=LEVEL_COLORS.get(label), linewidths=0)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(markerscale=5, frameon=False)
    return save(fig, path)


def curvature_pairs(cycloid: Sequence[float], bezier: Sequence[float], path) -> Path:
    fig, ax = new(4.0, 4.0)
    c = np.asarray(cycloid)
    b = np.asarray(bezier)
    positive = np.concatenate([c[c > 0], b[b > 0]])
    lo = positive.min() * 0.5 if len(positive) else 1e-3
    hi = max(positive.max() if len(positive) else 1.0, lo) * 1.5
    # straight-line ties (zero curvature) are drawn on the lower edge
    ax.scatter(np.maximum(b, lo), np.maximum(c, lo), s=8, color="#4c72b0")
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("Bezier max curvature [1/m]")
    ax.set_ylabel("cycloid max curvature [1/m]")
    return save(fig, path)
