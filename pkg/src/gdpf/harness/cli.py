"""Command-line entry point: simulate, track, eval, bench."""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from typing import Optional, Sequence

from .io import (
    TRACKER_NAMES,
    _parse_scenario,
    load_config,
    load_scenario,
    read_estimates_csv,
    read_truth_csv,
    save_scenario,
    summary_lines,
    write_summary,
)
from .metrics import evaluate
from .pipeline import run_bench, run_pipeline, run_tracker
from .scenario import generate_scenario
from ..types import Hyperparameters, validate_hyperparameters
from .baseline import NNBaselineConfig


def _cmd_simulate(args: argparse.Namespace) -> int:
    if not os.path.exists(args.spec):
        raise FileNotFoundError(f"scenario spec file not found: {args.spec}")
    cp = configparser.ConfigParser()
    cp.read(args.spec)
    if not cp.has_section("scenario"):
        raise ValueError(f"{args.spec}: missing [scenario] section")
    spec = _parse_scenario(cp["scenario"], args.spec)
    scenario = generate_scenario(spec, args.seed)
    save_scenario(args.out, scenario)
    n_meas = sum(len(m) for m in scenario.measurements)
    print(f"frames: {scenario.frames}")
    print(f"measurements: {n_meas}")
    print(f"out: {args.out}")
    return 0


def _cmd_track(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.config is not None:
        cfg = load_config(args.config)
        hyper, nn, speed, backend = cfg.hyper, cfg.nn, cfg.speed_threshold, cfg.backend
    else:
        hyper, nn, speed, backend = (
            validate_hyperparameters(Hyperparameters()),
            NNBaselineConfig(),
            0.5,
            None,
        )
    if args.backend is not None:
        backend = args.backend
    rows, stats = run_tracker(
        args.tracker, scenario, hyper, nn, backend=backend, speed_threshold=speed
    )
    os.makedirs(args.out, exist_ok=True)
    from .io import write_estimates_csv

    write_estimates_csv(os.path.join(args.out, "tracked_objects.csv"), rows)
    summary = {"tracker": args.tracker, **stats}
    write_summary(os.path.join(args.out, "run_summary.txt"), summary)
    print(summary_lines(summary), end="")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    truth = read_truth_csv(args.truth)
    ests = read_estimates_csv(args.estimates)
    result = evaluate(truth, ests, args.gt_id)
    import csv

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "id", "error"])
        for f, tid, err in result.per_frame:
            w.writerow([f, tid, repr(err)])
    summary = {
        "rmse": result.rmse,
        "id_switches": result.id_switches,
        "misses": result.misses,
        "matched_frames": len(result.per_frame),
    }
    write_summary(args.out + ".summary.txt", summary)
    print(summary_lines(summary), end="")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    out = run_bench(args.objects, args.frames, seed=args.seed, backend=args.backend)
    print(summary_lines(out), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gdpf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a scenario from a spec file")
    sim.add_argument("--spec", required=True, help="INI file with a [scenario] section")
    sim.add_argument("--seed", required=True, type=int)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=_cmd_simulate)

    trk = sub.add_parser("track", help="run a tracker over a saved scenario")
    trk.add_argument("--scenario", required=True, help="scenario directory")
    trk.add_argument("--tracker", required=True, choices=TRACKER_NAMES)
    trk.add_argument("--config", default=None, help="INI run config")
    trk.add_argument("--backend", default=None, choices=("fast", "python"))
    trk.add_argument("--out", required=True, help="output directory")
    trk.set_defaults(func=_cmd_track)

    ev = sub.add_parser("eval", help="score estimates against a truth stream")
    ev.add_argument("--truth", required=True, help="truth CSV")
    ev.add_argument("--estimates", required=True, help="estimates CSV")
    ev.add_argument("--gt-id", required=True, type=int, dest="gt_id")
    ev.add_argument("--out", required=True, help="per-frame error CSV to write")
    ev.set_defaults(func=_cmd_eval)

    ben = sub.add_parser("bench", help="measure per-frame processing time under load")
    ben.add_argument("--objects", required=True, type=int)
    ben.add_argument("--frames", required=True, type=int)
    ben.add_argument("--seed", type=int, default=1)
    ben.add_argument("--backend", default=None, choices=("fast", "python", "both"))
    ben.set_defaults(func=_cmd_bench)

    run = sub.add_parser("run", help="full pipeline from one config file")
    run.add_argument("--config", required=True)
    run.set_defaults(func=_cmd_run)
    return p


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    results = run_pipeline(cfg)
    for tracker, r in results.items():
        print(f"{tracker}.rmse: {r.rmse!r}")
        print(f"{tracker}.id_switches: {r.id_switches}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # CLI boundary: message + nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
