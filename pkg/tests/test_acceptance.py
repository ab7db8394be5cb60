"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]`` or ``[FAIL]`` line with the measured values,
visible even when pytest captures output.
"""

import time

import numpy as np
import pytest
from scipy import stats

from reachfield.cli import generate
from reachfield.config import ScenarioConfig
from reachfield.curves import Path3D, build_reach_path
from reachfield.experiments import compare_diversity, curve_ablation
from reachfield.field import (
    ConeField,
    SphericalField,
    is_inside_cone,
    orientation_step,
    residual_angle,
)
from reachfield.reward import reward_of, sample_rewards
from reachfield.rollout import CHUNK_SIZE, BetaError, discretize, extract_chunk
from reachfield.sampler import episode_for_index
from reachfield.so3 import random_rotation, random_unit_vector

CONE_TOL = 1e-12


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")

    return emit


def random_geometry(rng):
    """Goal, axis, half-angle and a start at distance 0.05..1 m."""
    goal = rng.uniform(-1, 1, 3)
    axis = random_unit_vector(rng)
    theta = rng.uniform(0.1, 1.4)
    start = goal + rng.uniform(0.05, 1.0) * random_unit_vector(rng)
    return ConeField(goal, axis, theta), start


def axial_radial(cone, pts):
    d = np.asarray(pts) - cone.goal
    a = d @ cone.axis
    r = np.linalg.norm(d - a[:, None] * cone.axis, axis=1)
    return a, r


def test_criterion_01_field_math(report):
    rng = np.random.default_rng(101)
    n = 100_000
    worst_pyth = 0.0
    mismatches = 0
    checked = 0
    for _ in range(n):
        goal = rng.uniform(-1, 1, 3)
        cone = ConeField(goal, random_unit_vector(rng), rng.uniform(0.05, 1.5))
        p = rng.uniform(-2, 2, 3)
        a, r = cone.decompose(p)
        d = np.linalg.norm(p - goal)
        worst_pyth = max(worst_pyth, abs(a * a + r * r - d * d))
        if d > 0:
            checked += 1
            brute = np.arccos(np.clip(a / d, -1, 1)) <= cone.half_angle
            mismatches += brute != is_inside_cone(cone, p)
    ok = worst_pyth <= 1e-10 and mismatches == 0 and checked == n
    report(1, ok, f"max |a^2+r^2-|d|^2| = {worst_pyth:.2e} (tol 1e-10), membership mismatches {mismatches}/{checked}")
    assert ok


@pytest.fixture(scope="module")
def geometries():
    rng = np.random.default_rng(202)
    out = []
    for _ in range(10_000):
        cone, start = random_geometry(rng)
        out.append((cone, start, build_reach_path(cone, start)))
    return out


def test_criterion_02_endpoint_tangent_monotone(report, geometries):
    worst_end = worst_cross = 0.0
    nonmono = 0
    for cone, _, path in geometries:
        pts = path.points
        worst_end = max(worst_end, float(np.linalg.norm(pts[-1] - cone.goal)))
        last = pts[-1] - pts[-2]
        worst_cross = max(worst_cross, float(np.linalg.norm(np.cross(last / np.linalg.norm(last), cone.axis))))
        a, r = axial_radial(cone, pts[path.curve_start :])
        slack = 1e-12 * (1 + np.abs(cone.goal).max())
        nonmono += bool(np.any(np.diff(a) > slack) or np.any(np.diff(r) > slack))
    ok = worst_end <= 1e-9 and worst_cross < 1e-6 and nonmono == 0
    report(
        2,
        ok,
        f"{len(geometries)} geometries: max end error {worst_end:.2e} (tol 1e-9), "
        f"max final cross {worst_cross:.2e} (tol 1e-6), non-monotone paths {nonmono}",
    )
    assert ok


def test_criterion_03_containment(report, geometries):
    outside = 0
    for cone, _, path in geometries:
        a, r = axial_radial(cone, path.points[path.curve_start :])
        outside += int(np.sum((a < -CONE_TOL) | (r > cone.slope * a + CONE_TOL)))
    # dense 10^4-point t-grid checked point by point with the library predicate
    rng = np.random.default_rng(303)
    dense_out = 0
    dense_total = 0
    for _ in range(30):
        cone, start = random_geometry(rng)
        path = build_reach_path(cone, start, samples=10_000)
        pts = path.points[path.curve_start :]
        dense_total += len(pts)
        dense_out += sum(not is_inside_cone(cone, p) for p in pts)
    ok = outside == 0 and dense_out == 0
    report(3, ok, f"samples outside cone: {outside} on 10^4 paths, {dense_out}/{dense_total} on dense t-grids")
    assert ok


def test_criterion_04_orientation_contraction(report):
    rng = np.random.default_rng(404)
    worst = 0.0
    for gain in (0.1, 0.5, 1.0):
        for _ in range(1000):
            field = SphericalField(random_rotation(rng), gain)
            R = random_rotation(rng)
            angle0 = residual_angle(field, R)
            for k in range(1, 11):
                R = orientation_step(field, R)
                worst = max(worst, abs(residual_angle(field, R) - (1 - gain) ** k * angle0))
    ok = worst <= 1e-8
    report(4, ok, f"max |residual - (1-K)^k angle0| = {worst:.2e} over K in {{0.1, 0.5, 1.0}}, 1000 rotations, k<=10 (tol 1e-8)")
    assert ok


def test_criterion_05_reward_law(report):
    exact = reward_of(np.zeros(3), np.zeros(3), 0.02) == 1.0 and reward_of(np.zeros(3), [0.02, 0, 0], 0.02) == 0.0
    ks = stats.kstest(sample_rewards(100_000, 0.02, 505, "uniform_reward"), "uniform").statistic
    vol = sample_rewards(100_000, 0.02, 506, "uniform_volume")
    edges = np.linspace(0, 1, 21)
    observed, _ = np.histogram(vol, edges)
    cdf = 1 - (1 - edges) ** 3
    expected = len(vol) * np.diff(cdf)
    p = stats.chisquare(observed, expected).pvalue
    ok = exact and ks < 0.01 and p > 0.01
    report(5, ok, f"endpoints exact={exact}, KS={ks:.4f} (< 0.01), chi-square p={p:.3f} (> 0.01)")
    assert ok


def test_criterion_06_chunking(report):
    cfg = ScenarioConfig(episodes=50)
    field = cfg.build_field()
    sizes = set()
    bad_pad = 0
    worst = 0.0
    padded = 0
    for i in range(cfg.episodes):
        traj, recs = episode_for_index(cfg, i, field)
        total = traj.positions[0].copy()
        for rec in recs:
            ch = rec.chunk
            sizes.add(len(ch))
            total = total + ch.dp[: ch.n_real].sum(axis=0)
            if ch.n_real < len(ch):
                padded += 1
                bad_pad += bool(np.any(ch.dp[ch.n_real :] != 0) or np.any(ch.dw[ch.n_real :] != 0))
        worst = max(worst, float(np.linalg.norm(total - traj.positions[-1])))
    # a trajectory shorter than one chunk
    short_path = Path3D(np.array([[0.5, 0.0, 0.15], [0.5, 0.0, 0.1]]))
    short = discretize(short_path, field, field.goal_rotation, 0.0025)
    ch = extract_chunk(short, 0)
    short_ok = short.n_actions < CHUNK_SIZE and len(ch) == CHUNK_SIZE and not np.any(ch.dp[ch.n_real :])
    ok = sizes == {CHUNK_SIZE} and bad_pad == 0 and worst <= 1e-8 and short_ok and padded > 0
    report(
        6,
        ok,
        f"chunk sizes {sorted(sizes)}, padded chunks {padded} with nonzero padding {bad_pad}, "
        f"short trajectory padded={short_ok}, max telescoping error {worst:.2e} (tol 1e-8)",
    )
    assert ok


def test_criterion_07_diversity_ordering(report):
    cfg = ScenarioConfig()
    rows = []
    for seed in range(5):
        cmp = compare_diversity(cfg, seed=seed, resolution=16, fixed_cube=True)
        rows.append((seed, cmp.ratios, cmp.ordered))
    ok = all(o for _, _, o in rows)
    detail = "; ".join(f"seed {s}: high {r['high']:.4f} > middle {r['middle']:.4f} > low {r['low']:.4f}" for s, r, _ in rows)
    report(7, ok, f"n=16 fixed cube, {detail}")
    assert ok


def test_criterion_08_curve_ablation(report):
    abl = curve_ablation(ScenarioConfig(), seeds=100)
    ties = sum(r["tie"] for r in abl.rows)
    ok = abl.fraction > 0.5
    lo, hi = abl.interval
    report(8, ok, f"fraction cycloid <= Bezier = {abl.fraction:.2f} (95% CI {lo:.3f}..{hi:.3f}, ties {ties}), needs > 0.5")
    assert ok


def test_criterion_09_beta(report):
    cfg = ScenarioConfig()
    field = cfg.build_field()
    cone = field.cone
    line = build_reach_path(cone, cone.goal + 0.25 * cone.axis)
    steps = discretize(line, field, field.goal_rotation, 0.0025).n_actions
    raised = False
    try:
        discretize(line, field, field.goal_rotation, line.length)
    except BetaError:
        raised = True
    guard_cfg = cfg.replace(beta_m=0.05, gripper_close_dist_m=0.01, episodes=200)
    early = 0
    for i in range(guard_cfg.episodes):
        try:
            traj, _ = episode_for_index(guard_cfg, i)
        except BetaError:
            continue  # path shorter than one step
        dist = np.linalg.norm(traj.positions[1:] - field.goal, axis=1)
        early += int(np.sum(traj.action_gripper & (dist > 0.01)))
    ok = abs(steps - 100) <= 1 and raised and early == 0
    report(9, ok, f"0.25 m path -> {steps} steps (100+-1), BetaError at beta=L: {raised}, early close commands: {early}")
    assert ok


def test_criterion_10_reproducibility_throughput(report, tmp_path):
    cfg = ScenarioConfig(episodes=1000)
    t0 = time.perf_counter()
    first = generate(cfg, tmp_path / "a")
    elapsed = time.perf_counter() - t0
    second = generate(cfg, tmp_path / "b")
    same = first["checksum"] == second["checksum"]
    ok = same and elapsed < 60.0
    report(
        10,
        ok,
        f"identical checksums: {same}; 1000 episodes in {elapsed:.1f} s (< 60 s), "
        f"{first['records']} records, {first['frames']} action frames",
    )
    assert ok
