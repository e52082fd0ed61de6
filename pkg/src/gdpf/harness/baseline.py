"""Greedy nearest-neighbor baseline tracker.

Classical gate-and-update track management: per frame, track/measurement
pairs are matched greedily by distance inside a gate, matched tracks are
Kalman-corrected, unmatched measurements open tracks, and tracks die
after a run of consecutive misses.  Expected to swap ids when targets
cross inside the gate; that weakness is the point of the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dynamics import birth_state, cv_model, kf_predict, kf_update, position_measurement_model
from .scenario import Scenario


@dataclass(frozen=True)
class NNBaselineConfig:
    gate_radius: float = 2.5
    max_misses: int = 3
    process_noise_scale: float = 1.0
    v_max: float = 15.0
    meas_noise_floor: float = 0.05  # std in meters, keeps R nonsingular at noise 0


@dataclass
class _Track:
    id: int
    mean: np.ndarray
    cov: np.ndarray
    misses: int = 0


def nn_baseline_track(
    scenario: Scenario, config: NNBaselineConfig = NNBaselineConfig()
) -> dict[int, list[tuple[int, float, float]]]:
    """Run the baseline over a scenario; returns frame -> [(id, x, y)]."""
    if config.gate_radius <= 0:
        raise ValueError("gate_radius must be > 0")
    noise_std = max(float(scenario.meta.get("noise_std", 0.2)), config.meas_noise_floor)
    r = noise_std * noise_std * np.eye(2)
    motion = cv_model(scenario.dt, config.process_noise_scale)
    meas_model = position_measurement_model(r)

    tracks: list[_Track] = []
    next_id = 0
    out: dict[int, list[tuple[int, float, float]]] = {}
    for f in range(scenario.frames):
        for tr in tracks:
            tr.mean, tr.cov = kf_predict(tr.mean, tr.cov, motion)

        ms = scenario.measurements[f]
        pairs = []
        for ti, tr in enumerate(tracks):
            for mi, m in enumerate(ms):
                d = math.hypot(tr.mean[0] - m.position[0], tr.mean[1] - m.position[1])
                if d <= config.gate_radius:
                    pairs.append((d, ti, mi))
        pairs.sort()
        used_t: set[int] = set()
        used_m: set[int] = set()
        for d, ti, mi in pairs:
            if ti in used_t or mi in used_m:
                continue
            tr = tracks[ti]
            tr.mean, tr.cov, _ = kf_update(tr.mean, tr.cov, ms[mi].position, meas_model)
            tr.misses = 0
            used_t.add(ti)
            used_m.add(mi)

        for ti, tr in enumerate(tracks):
            if ti not in used_t:
                tr.misses += 1
        tracks = [tr for tr in tracks if tr.misses <= config.max_misses]

        for mi, m in enumerate(ms):
            if mi in used_m:
                continue
            mean, cov = birth_state(m.position, r, config.v_max)
            tracks.append(_Track(id=next_id, mean=mean, cov=cov))
            next_id += 1

        out[f] = [(tr.id, float(tr.mean[0]), float(tr.mean[1])) for tr in tracks]
    return out
