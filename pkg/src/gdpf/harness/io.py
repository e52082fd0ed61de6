"""File formats: plain CSV streams, key: value summaries, INI run configs.

Floats are serialized with repr() so that serialize -> parse -> serialize
round-trips byte-identically.
"""

from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from ..types import Hyperparameters, Measurement, validate_hyperparameters
from .baseline import NNBaselineConfig
from .scenario import Scenario, ScenarioSpec, TargetSpec, preset_spec

TRACKER_NAMES = ("gdpf-bbox", "gdpf-grid", "nn")


def _f(v: float) -> str:
    return repr(float(v))


# ---------------------------------------------------------------- CSV streams


def write_estimates_csv(path: str, rows_by_frame: dict[int, list[tuple[int, float, float]]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "id", "x", "y"])
        for f in sorted(rows_by_frame):
            for tid, x, y in rows_by_frame[f]:
                w.writerow([f, tid, _f(x), _f(y)])


def read_estimates_csv(path: str) -> dict[int, list[tuple[int, float, float]]]:
    out: dict[int, list[tuple[int, float, float]]] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["frame", "id", "x", "y"]:
            raise ValueError(f"{path}: expected header frame,id,x,y, got {header}")
        for line, row in enumerate(r, start=2):
            try:
                f, tid = int(row[0]), int(row[1])
                x, y = float(row[2]), float(row[3])
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{line}: malformed estimate row {row}") from None
            out.setdefault(f, []).append((tid, x, y))
    return out


def write_truth_csv(path: str, truths: list[list[tuple[int, float, float, float, float]]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "id", "x", "y", "vx", "vy"])
        for f, rows in enumerate(truths):
            for tid, x, y, vx, vy in rows:
                w.writerow([f, tid, _f(x), _f(y), _f(vx), _f(vy)])


def read_truth_csv(path: str) -> dict[int, list[tuple[int, float, float, float, float]]]:
    out: dict[int, list[tuple[int, float, float, float, float]]] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["frame", "id", "x", "y", "vx", "vy"]:
            raise ValueError(f"{path}: expected header frame,id,x,y,vx,vy, got {header}")
        for line, row in enumerate(r, start=2):
            try:
                out.setdefault(int(row[0]), []).append(
                    (int(row[1]), float(row[2]), float(row[3]), float(row[4]), float(row[5]))
                )
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{line}: malformed truth row {row}") from None
    return out


_MEAS_HEADERS = {
    "bbox": ["frame", "x", "y", "x_half", "y_half", "heading"],
    "grid": ["frame", "x", "y", "row", "col"],
    "point": ["frame", "x", "y"],
}


def write_measurements_csv(path: str, scenario: Scenario) -> None:
    mode = scenario.meta["mode"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_MEAS_HEADERS[mode])
        for f, ms in enumerate(scenario.measurements):
            for m in ms:
                row = [f, _f(m.position[0]), _f(m.position[1])]
                if mode == "bbox":
                    row += [_f(m.extent[0]), _f(m.extent[1]), _f(m.extent[2])]
                elif mode == "grid":
                    row += [m.cell_index[0], m.cell_index[1]]
                w.writerow(row)


def read_measurements_csv(path: str, frames: int) -> tuple[str, list[list[Measurement]]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        mode = next((k for k, h in _MEAS_HEADERS.items() if h == header), None)
        if mode is None:
            raise ValueError(f"{path}: unrecognized measurement header {header}")
        out: list[list[Measurement]] = [[] for _ in range(frames)]
        for line, row in enumerate(r, start=2):
            try:
                f = int(row[0])
                pos = (float(row[1]), float(row[2]))
                if mode == "bbox":
                    m = Measurement(
                        frame=f, position=pos, extent=(float(row[3]), float(row[4]), float(row[5]))
                    )
                elif mode == "grid":
                    m = Measurement(frame=f, position=pos, cell_index=(int(row[3]), int(row[4])))
                else:
                    m = Measurement(frame=f, position=pos)
                out[f].append(m)
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{line}: malformed measurement row {row}") from None
    return mode, out


# ------------------------------------------------------------ meta / summary


_META_ORDER = (
    "frames", "dt", "noise_std", "clutter_rate", "det_prob", "fov", "mode",
    "cell_size", "box_half_x", "box_half_y", "gt_id", "seed", "n_targets",
)
_META_INT = {"frames", "gt_id", "seed", "n_targets"}


def write_meta(path: str, meta: dict) -> None:
    with open(path, "w") as fh:
        for key in _META_ORDER:
            v = meta[key]
            if key == "fov":
                v = ",".join(_f(c) for c in v)
            elif isinstance(v, float):
                v = _f(v)
            fh.write(f"{key}: {v}\n")


def read_meta(path: str) -> dict:
    meta: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if key == "fov":
                meta[key] = tuple(float(c) for c in value.split(","))
            elif key in _META_INT:
                meta[key] = int(value)
            elif key == "mode":
                meta[key] = value
            else:
                meta[key] = float(value)
    missing = [k for k in _META_ORDER if k not in meta]
    if missing:
        raise ValueError(f"{path}: missing meta keys {missing}")
    return meta


def write_summary(path: str, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}: {_f(v) if isinstance(v, float) else v}\n")


def summary_lines(items: dict) -> str:
    return "".join(
        f"{k}: {_f(v) if isinstance(v, float) else v}\n" for k, v in items.items()
    )


# --------------------------------------------------------- scenario save/load


def save_scenario(out_dir: str, scenario: Scenario) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_truth_csv(os.path.join(out_dir, "truth.csv"), scenario.truths)
    write_measurements_csv(os.path.join(out_dir, "measurements.csv"), scenario)
    write_meta(os.path.join(out_dir, "meta.txt"), scenario.meta)


def load_scenario(in_dir: str) -> Scenario:
    meta_path = os.path.join(in_dir, "meta.txt")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"scenario meta file not found: {meta_path}")
    meta = read_meta(meta_path)
    truth_path = os.path.join(in_dir, "truth.csv")
    meas_path = os.path.join(in_dir, "measurements.csv")
    for p in (truth_path, meas_path):
        if not os.path.exists(p):
            raise FileNotFoundError(f"scenario file not found: {p}")
    frames = meta["frames"]
    truth_map = read_truth_csv(truth_path)
    truths = [sorted(truth_map.get(f, [])) for f in range(frames)]
    mode, measurements = read_measurements_csv(meas_path, frames)
    if mode != meta["mode"]:
        raise ValueError(f"{meas_path}: mode {mode} contradicts meta mode {meta['mode']}")
    return Scenario(
        frames=frames,
        dt=meta["dt"],
        truths=truths,
        measurements=measurements,
        seed=meta["seed"],
        meta=meta,
    )


# -------------------------------------------------------------- INI configs


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs, parsed from one INI file."""

    hyper: Hyperparameters
    nn: NNBaselineConfig
    scenario: Optional[ScenarioSpec]
    scenario_dir: Optional[str]
    seed: int
    trackers: tuple[str, ...]
    out_dir: Optional[str]
    backend: Optional[str]
    speed_threshold: float


_HYPER_FLOATS = (
    "alpha", "gamma", "a", "b", "process_noise_scale", "survival_prob",
    "assoc_gain", "count_decay", "birth_existence", "new_cluster_likelihood",
    "dt", "link_scale", "link_floor", "v_max",
)


def _parse_hyper(section: configparser.SectionProxy, path: str) -> Hyperparameters:
    h = Hyperparameters()
    kwargs = {}
    for key in section:
        if key in _HYPER_FLOATS:
            kwargs[key] = float(section[key])
        elif key == "use_crp_factor":
            kwargs[key] = section.getboolean(key)
        elif key == "meas_noise_cov":
            parts = [float(p) for p in section[key].split(",")]
            if len(parts) == 1:
                kwargs[key] = parts[0] * np.eye(2)
            elif len(parts) == 2:
                kwargs[key] = np.diag(parts)
            else:
                raise ValueError(
                    f"{path}: [filter] meas_noise_cov takes one variance or two diagonal entries"
                )
        else:
            raise ValueError(f"{path}: unknown [filter] key {key!r}")
    return validate_hyperparameters(replace(h, **kwargs))


def _parse_scenario(section: configparser.SectionProxy, path: str) -> ScenarioSpec:
    kwargs: dict = {}
    base = None
    for key in section:
        if key == "preset":
            base = preset_spec(section[key])
        elif key in ("frames", "gt_id"):
            kwargs[key] = int(section[key])
        elif key in ("dt", "noise_std", "clutter_rate", "det_prob", "cell_size",
                     "box_half_x", "box_half_y"):
            kwargs[key] = float(section[key])
        elif key == "fov":
            parts = [float(p) for p in section[key].split(",")]
            if len(parts) != 4:
                raise ValueError(f"{path}: [scenario] fov takes xmin,xmax,ymin,ymax")
            kwargs[key] = tuple(parts)
        elif key == "mode":
            kwargs[key] = section[key].strip()
        elif key == "targets":
            targets = []
            for chunk in section[key].split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                vals = [p.strip() for p in chunk.split(",")]
                if len(vals) < 4:
                    raise ValueError(
                        f"{path}: [scenario] target needs x0,y0,vx,vy[,born[,died]]: {chunk!r}"
                    )
                born = int(vals[4]) if len(vals) > 4 else 0
                died = int(vals[5]) if len(vals) > 5 else None
                targets.append(
                    TargetSpec(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]),
                               born=born, died=died)
                )
            kwargs[key] = tuple(targets)
        else:
            raise ValueError(f"{path}: unknown [scenario] key {key!r}")
    if base is None:
        base = ScenarioSpec()
    return replace(base, **kwargs)


def _parse_nn(section: configparser.SectionProxy, path: str) -> NNBaselineConfig:
    kwargs = {}
    valid = {f.name for f in fields(NNBaselineConfig)}
    for key in section:
        if key not in valid:
            raise ValueError(f"{path}: unknown [nn] key {key!r}")
        kwargs[key] = int(section[key]) if key == "max_misses" else float(section[key])
    return NNBaselineConfig(**kwargs)


def load_config(path: str) -> RunConfig:
    """Parse a run config INI; unknown sections or keys are errors."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)

    known = {"scenario", "filter", "nn", "run"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ValueError(f"{path}: unknown sections {sorted(unknown)}")

    hyper = _parse_hyper(cp["filter"], path) if cp.has_section("filter") else (
        validate_hyperparameters(Hyperparameters())
    )
    nn = _parse_nn(cp["nn"], path) if cp.has_section("nn") else NNBaselineConfig()
    scenario = _parse_scenario(cp["scenario"], path) if cp.has_section("scenario") else None

    seed = 7
    trackers: tuple[str, ...] = ("gdpf-bbox",)
    out_dir = None
    backend = None
    scenario_dir = None
    speed_threshold = 0.5
    if cp.has_section("run"):
        for key in cp["run"]:
            if key == "seed":
                seed = int(cp["run"][key])
            elif key == "trackers":
                trackers = tuple(t.strip() for t in cp["run"][key].split(",") if t.strip())
                bad = [t for t in trackers if t not in TRACKER_NAMES]
                if bad:
                    raise ValueError(f"{path}: unknown trackers {bad}; valid: {TRACKER_NAMES}")
            elif key == "out":
                out_dir = cp["run"][key]
            elif key == "backend":
                backend = cp["run"][key].strip()
            elif key == "scenario_dir":
                scenario_dir = cp["run"][key]
            elif key == "speed_threshold":
                speed_threshold = float(cp["run"][key])
            else:
                raise ValueError(f"{path}: unknown [run] key {key!r}")

    return RunConfig(
        hyper=hyper,
        nn=nn,
        scenario=scenario,
        scenario_dir=scenario_dir,
        seed=seed,
        trackers=trackers,
        out_dir=out_dir,
        backend=backend,
        speed_threshold=speed_threshold,
    )
