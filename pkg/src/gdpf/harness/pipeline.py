"""Wiring: simulate -> track -> evaluate, plus the load benchmark."""

from __future__ import annotations

import os
import time
from dataclasses import replace
from typing import Optional

from .. import backends
from ..dynamics import models_from_hyper
from ..filter import estimates as track_estimates
from ..filter import process_frame
from ..types import Hyperparameters, LinkMode, validate_hyperparameters
from .baseline import NNBaselineConfig, nn_baseline_track
from .io import (
    RunConfig,
    load_scenario,
    save_scenario,
    write_estimates_csv,
    write_summary,
)
from .metrics import EvalResult, evaluate
from .scenario import Scenario, bench_spec, generate_scenario

_LINK_MODE = {"gdpf-bbox": LinkMode.BBOX, "gdpf-grid": LinkMode.GRID}


def run_gdpf(
    scenario: Scenario,
    hyper: Hyperparameters,
    link_mode: LinkMode,
    *,
    backend: Optional[str] = None,
    speed_threshold: float = 0.5,
) -> tuple[dict[int, list[tuple[int, float, float]]], dict]:
    """Run the filter over a scenario; returns estimate rows and run stats.

    Frame timing is wall-clock around the frame processing only; scenario
    access and estimate extraction are excluded.
    """
    mode_name = {LinkMode.BBOX: "bbox", LinkMode.GRID: "grid"}.get(link_mode)
    if mode_name is not None and scenario.meta.get("mode") != mode_name:
        raise ValueError(
            f"scenario was generated in mode {scenario.meta.get('mode')!r}, "
            f"but the tracker needs {mode_name!r} measurements"
        )
    hyper = validate_hyperparameters(hyper)
    if abs(hyper.dt - scenario.dt) > 1e-12:
        hyper = validate_hyperparameters(replace(hyper, dt=scenario.dt))
    motion, meas_model = models_from_hyper(hyper)

    import gdpf

    state = gdpf.new_filter_state(hyper)
    rows: dict[int, list[tuple[int, float, float]]] = {}
    elapsed = []
    births = prunes = 0
    live_counts = []
    for f in range(scenario.frames):
        state, report = process_frame(
            state, scenario.measurements[f], motion, meas_model, link_mode, backend=backend
        )
        elapsed.append(report.elapsed)
        births += len(report.born)
        prunes += len(report.pruned)
        ests = track_estimates(state, speed_threshold)
        live_counts.append(len(ests))
        rows[f] = [(e.id, float(e.position[0]), float(e.position[1])) for e in ests]

    stats = {
        "frames": scenario.frames,
        "mean_frame_time_ms": 1000.0 * sum(elapsed) / max(len(elapsed), 1),
        "max_frame_time_ms": 1000.0 * max(elapsed, default=0.0),
        "mean_object_count": sum(live_counts) / max(len(live_counts), 1),
        "births": births,
        "prunes": prunes,
        "backend": backend or backends.default_backend(),
    }
    return rows, stats


def run_tracker(
    name: str,
    scenario: Scenario,
    hyper: Hyperparameters,
    nn: NNBaselineConfig = NNBaselineConfig(),
    *,
    backend: Optional[str] = None,
    speed_threshold: float = 0.5,
) -> tuple[dict[int, list[tuple[int, float, float]]], dict]:
    if name in _LINK_MODE:
        return run_gdpf(
            scenario, hyper, _LINK_MODE[name], backend=backend, speed_threshold=speed_threshold
        )
    if name == "nn":
        t0 = time.perf_counter()
        rows = nn_baseline_track(scenario, nn)
        total = time.perf_counter() - t0
        stats = {
            "frames": scenario.frames,
            "mean_frame_time_ms": 1000.0 * total / max(scenario.frames, 1),
            "mean_object_count": sum(len(v) for v in rows.values()) / max(len(rows), 1),
            "backend": "python",
        }
        return rows, stats
    raise ValueError(f"unknown tracker {name!r}")


def _truth_by_frame(scenario: Scenario) -> dict[int, list]:
    return {f: rows for f, rows in enumerate(scenario.truths)}


def run_pipeline(cfg: RunConfig) -> dict[str, EvalResult]:
    """Generate (or load) a scenario, run the configured trackers, evaluate,
    and write all artifacts under the configured output directory."""
    if cfg.scenario_dir is not None:
        scenario = load_scenario(cfg.scenario_dir)
        generated = False
    elif cfg.scenario is not None:
        scenario = generate_scenario(cfg.scenario, cfg.seed)
        generated = True
    else:
        raise ValueError("config needs a [scenario] section or a run.scenario_dir")

    out_dir = cfg.out_dir
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if generated:
            save_scenario(os.path.join(out_dir, "scenario"), scenario)

    gt_id = int(scenario.meta["gt_id"])
    results: dict[str, EvalResult] = {}
    summary: dict[str, object] = {}
    multi = len(cfg.trackers) > 1
    for tracker in cfg.trackers:
        rows, stats = run_tracker(
            tracker,
            scenario,
            cfg.hyper,
            cfg.nn,
            backend=cfg.backend,
            speed_threshold=cfg.speed_threshold,
        )
        result = evaluate(
            _truth_by_frame(scenario),
            rows,
            gt_id,
            mean_frame_time=stats["mean_frame_time_ms"] / 1000.0,
            mean_object_count=stats["mean_object_count"],
        )
        results[tracker] = result
        prefix = f"{tracker}." if multi else ""
        summary[f"{prefix}tracker"] = tracker
        summary[f"{prefix}rmse"] = result.rmse
        summary[f"{prefix}id_switches"] = result.id_switches
        summary[f"{prefix}misses"] = result.misses
        summary[f"{prefix}mean_frame_time_ms"] = 1000.0 * result.mean_frame_time
        summary[f"{prefix}mean_object_count"] = result.mean_object_count
        if out_dir is not None:
            stem = f"{tracker}_" if multi else ""
            write_estimates_csv(os.path.join(out_dir, f"{stem}tracked_objects.csv"), rows)
            _write_eval_csv(os.path.join(out_dir, f"{stem}eval.csv"), result)

    if out_dir is not None:
        write_summary(os.path.join(out_dir, "summary.txt"), summary)
    return results


def _write_eval_csv(path: str, result: EvalResult) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "id", "error"])
        for f, tid, err in result.per_frame:
            w.writerow([f, tid, repr(err)])


def bench_hyperparameters() -> Hyperparameters:
    """Bench uses the defaults except quick clutter death, so the live set
    stays near the scripted object count instead of accumulating clutter."""
    return replace(Hyperparameters(), birth_existence=0.1)


def run_bench(
    objects: int,
    frames: int,
    *,
    seed: int = 1,
    backend: Optional[str] = None,
) -> dict:
    """Generate a dense scenario and measure per-frame processing time.

    ``backend`` may be "fast", "python", or "both" (comparison table).
    """
    spec = bench_spec(objects, frames)
    scenario = generate_scenario(spec, seed)
    mean_meas = sum(len(m) for m in scenario.measurements) / max(scenario.frames, 1)
    hyper = bench_hyperparameters()

    names: tuple[str, ...]
    if backend == "both":
        names = tuple(backends.available_backends())
    else:
        names = (backend or backends.default_backend(),)

    out: dict[str, object] = {
        "objects": objects,
        "frames": frames,
        "seed": seed,
        "mean_measurements_per_frame": mean_meas,
    }
    for name in names:
        t0 = time.perf_counter()
        _, stats = run_gdpf(scenario, hyper, LinkMode.BBOX, backend=name)
        total = time.perf_counter() - t0
        key = f"{name}." if len(names) > 1 else ""
        out[f"{key}backend"] = name
        out[f"{key}mean_frame_time_ms"] = stats["mean_frame_time_ms"]
        out[f"{key}max_frame_time_ms"] = stats["max_frame_time_ms"]
        out[f"{key}mean_live_clusters"] = stats["mean_object_count"]
        out[f"{key}total_s"] = total
    return out
