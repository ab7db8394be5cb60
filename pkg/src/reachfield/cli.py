"""Command-line front end.

Exit codes:
    0  success
    1  unexpected internal error
    2  usage or configuration error
    3  generation error (degenerate start pose, beta not below path length)
    4  dataset error (missing files, version, checksum, count, schema)
    5  empty input (nothing to analyse)
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from . import __version__
from .config import ConfigError, ScenarioConfig, describe_keys, load_config
from .dataset import DatasetError, DatasetWriter, OrderedBuffer, encode_record, read_dataset
from .experiments import compare_diversity, curve_ablation, trajectories_from_records
from .field import DegenerateStartError
from .metrics import bounding_cube, coverage, diversity_summary, write_scatter_csv
from .rollout import BetaError
from .sampler import WorkspaceBox, episode_for_index

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_DATASET = 4
EXIT_EMPTY = 5
JOBS_ENV = "REACHFIELD_JOBS"


class EmptyInputError(Exception):
    pass


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "episodes", None) is not None:
        changes["episodes"] = args.episodes
    if getattr(args, "curve", None) is not None:
        changes["curve_type"] = args.curve
    if getattr(args, "reward", None) is not None:
        changes["reward_mode"] = args.reward
    if getattr(args, "resolution", None) is not None:
        changes["coverage_resolution"] = args.resolution
    return cfg.replace(**changes) if changes else cfg


def _episode_job(cfg_dict: dict, index: int) -> tuple[int, list[dict], int]:
    cfg = ScenarioConfig.from_mapping(cfg_dict)
    traj, recs = episode_for_index(cfg, index)
    return index, [encode_record(r) for r in recs], traj.n_actions


def generate(cfg: ScenarioConfig, out: Path, config_text: str = "", jobs: int = 1) -> dict:
    """Write the scenario's dataset to ``out``; returns a summary dict."""
    total = cfg.total_episodes
    writer = DatasetWriter(out, cfg.to_dict(), config_text, cfg.master_seed)
    frames = 0
    t0 = time.perf_counter()
    try:
        if jobs <= 1 or total <= 1:
            field_ = cfg.build_field()
            for i in range(total):
                traj, recs = episode_for_index(cfg, i, field_)
                frames += traj.n_actions
                writer.write_all(recs)
        else:
            buf = OrderedBuffer()
            cfg_dict = cfg.to_dict()
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_episode_job, cfg_dict, i) for i in range(total)]
                for fut in as_completed(futures):
                    index, recs, n = fut.result()
                    frames += n
                    writer.write_all(buf.put(index, recs))
        writer.extra = {"frames": frames}
        manifest = writer.close(total)
    except BaseException:
        writer.abort()
        raise
    elapsed = time.perf_counter() - t0
    return {
        "out": str(out),
        "episodes": manifest.episode_count,
        "records": manifest.record_count,
        "frames": frames,
        "seconds": round(elapsed, 3),
        "frames_per_sec": round(frames / elapsed, 1) if elapsed > 0 else None,
        "checksum": manifest.checksum,
    }


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def cmd_generate(args) -> int:
    cfg, text = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    summary = generate(cfg, Path(args.out), text, args.jobs)
    print(
        f"episodes={summary['episodes']} records={summary['records']} frames={summary['frames']} "
        f"time={summary['seconds']}s frames/sec={summary['frames_per_sec']}"
    )
    print(f"checksum sha256:{summary['checksum']}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    cfg, _ = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    resolution = cfg.coverage_resolution
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    if args.compare:
        levels = [s.strip() for s in args.compare.split(",") if s.strip()]
        fixed = True if args.fixed_cube is None else args.fixed_cube
        cmp = compare_diversity(cfg, resolution=resolution, fixed_cube=fixed, levels=levels)
        report = cmp.to_dict() if set(levels) == {"low", "middle", "high"} else {
            k: v for k, v in cmp.to_dict().items() if k != "ordered_high_gt_middle_gt_low"
        }
        print(json.dumps(report, indent=2, sort_keys=True))
        if out:
            _write_json(out / "coverage.json", report)
            rows = [[lv, r["N"], r["N_traversed"], r["ratio"], resolution] for lv, r in report["reports"].items()]
            _write_csv(out / "coverage.csv", ["level", "N", "N_traversed", "ratio", "resolution"], rows)
            from . import plotting

            plotting.coverage_bars(cmp.ratios, out / "coverage.png", resolution)
            plotting.xy_scatter(cmp.xy, out / "xy_scatter.png")
            for lv, xy in cmp.xy.items():
                write_scatter_csv(out / f"xy_{lv}.csv", xy)
        return EXIT_OK

    if args.dataset:
        _, records = read_dataset(args.dataset)
        trajs = trajectories_from_records(records)
    else:
        trajs = [episode_for_index(cfg, i)[0].positions for i in range(cfg.total_episodes)]
    if not trajs:
        raise EmptyInputError("no trajectories to analyse")
    cube = None
    if args.fixed_cube:
        box = WorkspaceBox.from_config(cfg)
        cube = bounding_cube([[box.lo, box.hi, cfg.goal_position]] + list(trajs))
    rep = coverage(trajs, resolution, cube)
    summary = diversity_summary(trajs, cube=cube)
    report = {"coverage": rep.to_dict(), "fixed_cube": bool(args.fixed_cube), "summary": summary.to_dict()}
    print(json.dumps(report, indent=2, sort_keys=True))
    if out:
        _write_json(out / "coverage.json", report)
        _write_csv(
            out / "coverage.csv",
            ["N", "N_traversed", "ratio", "resolution"],
            [[rep.total, rep.traversed, rep.ratio, rep.resolution]],
        )
        from . import plotting

        plotting.xy_scatter({"trajectories": summary.xy}, out / "xy_scatter.png")
        write_scatter_csv(out / "xy.csv", summary.xy)
    return EXIT_OK


def cmd_ablate_curve(args) -> int:
    cfg, _ = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    abl = curve_ablation(cfg, args.seeds)
    report = abl.to_dict()
    brief = {k: v for k, v in report.items() if k != "rows"}
    print(json.dumps(brief, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "ablation.json", report)
        cols = ["index", "seed", "cycloid_max_curvature", "bezier_max_curvature", "cycloid_length", "bezier_length", "cycloid_le_bezier", "tie"]
        _write_csv(out / "ablation.csv", cols, [[r[c] for c in cols] for r in abl.rows])
        from . import plotting

        plotting.curvature_pairs(
            [r["cycloid_max_curvature"] for r in abl.rows],
            [r["bezier_max_curvature"] for r in abl.rows],
            out / "curvature.png",
        )
    return EXIT_OK


def cmd_inspect(args) -> int:
    manifest, records = read_dataset(args.dataset, decode=False)
    print(json.dumps(manifest.to_dict(), indent=2, sort_keys=True))
    for i, rec in enumerate(records):
        if i >= args.k:
            break
        print(json.dumps(rec, sort_keys=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachfield",
        description="Generate and analyse field-guided reach trajectories.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="scenario config keys (YAML) and defaults:\n" + describe_keys() + "\n\n" + __doc__.split("\n\n", 1)[1],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_seed=True):
        p.add_argument("--config", help="scenario YAML file (defaults used when omitted)")
        if with_seed:
            p.add_argument("--seed", type=int, help="master seed (overrides master_seed)")
            p.add_argument("--episodes", type=int, help="episode count (overrides episodes)")
        p.add_argument("--curve", choices=["cycloid", "bezier"], help="overrides curve_type")
        p.add_argument("--reward", choices=["off", "uniform_reward", "uniform_volume"], help="overrides reward_mode")

    g = sub.add_parser("generate", help="write an episode dataset")
    common(g)
    g.add_argument("--out", required=True, help="dataset directory")
    g.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get(JOBS_ENV, "1")),
        help=f"worker processes (default ${JOBS_ENV} or 1); output does not depend on it",
    )
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("coverage", help="voxel coverage of a dataset, a scenario, or the three baselines")
    common(c)
    c.add_argument("--dataset", help="dataset directory to analyse instead of generating")
    c.add_argument("--resolution", type=int, help="voxels per axis (overrides coverage_resolution)")
    c.add_argument(
        "--fixed-cube",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="share one cube across compared sets (default on with --compare); "
        "for a single set, use the cube spanning the workspace box and goal",
    )
    c.add_argument("--compare", help="comma-separated diversity levels, e.g. low,middle,high")
    c.add_argument("--out", help="directory for coverage.json/.csv and figures")
    c.set_defaults(func=cmd_coverage)

    a = sub.add_parser("ablate-curve", help="cycloid vs Bezier curvature on shared geometry")
    common(a)
    a.add_argument("--seeds", type=int, default=100, help="number of geometries (default 100)")
    a.add_argument("--out", help="directory for ablation.json/.csv and figures")
    a.set_defaults(func=cmd_ablate_curve)

    i = sub.add_parser("inspect", help="print a dataset manifest and its first records")
    i.add_argument("dataset", help="dataset directory")
    i.add_argument("-k", type=int, default=3, help="records to print (default 3)")
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateStartError, BetaError) as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except EmptyInputError as exc:
        print(f"empty input: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
