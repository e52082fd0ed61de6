"""Wrapper that packs the filter state into flat arrays for the compiled loop."""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from ..dynamics import MeasurementModel
from ..priors import TransitionFn
from ..types import Cluster, FilterState, FrameReport, LinkMode, Measurement
from . import _loop

log = logging.getLogger(__name__)

_CANONICAL_C = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
_MODE_CODE = {LinkMode.NONE: 0, LinkMode.BBOX: 1, LinkMode.GRID: 2}


def supported(
    state: FilterState,
    measurements: Sequence[Measurement],
    meas_model: MeasurementModel,
    link_mode: LinkMode,
    transition: Optional[TransitionFn],
) -> bool:
    """The kernel handles the default model only: uniform transition,
    position observation of a 4-dim state, uniform measurement kinds."""
    if transition is not None:
        return False
    if meas_model.observation.shape != (2, 4) or not np.array_equal(
        meas_model.observation, _CANONICAL_C
    ):
        return False
    if meas_model.noise.shape != (2, 2):
        return False
    for c in state.clusters.values():
        if c.state_mean.shape != (4,) or c.state_cov.shape != (4, 4):
            return False
    if link_mode is LinkMode.BBOX and any(m.extent is None for m in measurements):
        return False
    if link_mode is LinkMode.GRID and any(m.cell_index is None for m in measurements):
        return False
    return True


def run_measurement_loop(
    state: FilterState,
    measurements: Sequence[Measurement],
    meas_model: MeasurementModel,
    link_mode: LinkMode,
    transition: Optional[TransitionFn],
    report: FrameReport,
) -> None:
    h = state.hyper
    clusters = list(state.clusters.values())  # insertion order == ascending id
    k0 = len(clusters)
    m = len(measurements)
    cap = k0 + m

    means = np.empty((cap, 4))
    covs = np.empty((cap, 4, 4))
    counts = np.empty(cap)
    exist = np.empty(cap)
    ids = np.empty(cap, dtype=np.int64)
    frozen = np.zeros(cap, dtype=np.uint8)
    for r, c in enumerate(clusters):
        means[r] = c.state_mean
        covs[r] = c.state_cov
        counts[r] = c.assign_count
        exist[r] = c.existence
        ids[r] = c.id
        frozen[r] = 1 if c.frozen_frames else 0

    meas_xy = np.ascontiguousarray([mm.position for mm in measurements], dtype=float).reshape(m, 2)
    meas_w = np.array([mm.weight for mm in measurements], dtype=float)
    if link_mode is LinkMode.BBOX:
        extents = np.ascontiguousarray([mm.extent for mm in measurements], dtype=float).reshape(m, 3)
    else:
        extents = np.zeros((0, 3))
    if link_mode is LinkMode.GRID:
        cells = np.ascontiguousarray([mm.cell_index for mm in measurements], dtype=np.int64).reshape(m, 2)
    else:
        cells = np.zeros((0, 2), dtype=np.int64)

    out_label = np.empty(m, dtype=np.int64)
    out_row = np.empty(m, dtype=np.int64)
    out_post = np.empty(m)
    out_flag = np.zeros(m, dtype=np.uint8)

    r = meas_model.noise
    k_final, next_id = _loop.run(
        means, covs, counts, exist, frozen, ids, k0,
        meas_xy, meas_w, extents, cells, _MODE_CODE[link_mode],
        h.alpha, h.link_floor, h.link_scale, h.a, h.b,
        h.new_cluster_likelihood, h.assoc_gain, h.birth_existence,
        h.use_crp_factor,
        float(r[0, 0]), float(r[0, 1]), float(r[1, 0]), float(r[1, 1]),
        h.v_max, state.next_id,
        out_label, out_row, out_post, out_flag,
    )

    frame_idx = state.current_frame_index()
    for row, c in enumerate(clusters):
        c.state_mean = means[row].copy()
        c.state_cov = covs[row].copy()
        c.assign_count = float(counts[row])
        c.existence = float(exist[row])
    for row in range(k0, k_final):
        cid = int(ids[row])
        state.clusters[cid] = Cluster(
            id=cid,
            state_mean=means[row].copy(),
            state_cov=covs[row].copy(),
            assign_count=float(counts[row]),
            existence=float(exist[row]),
            born_frame=frame_idx,
            last_assigned_frame=frame_idx,
        )
    state.next_id = int(next_id)
    report.born.extend(int(ids[row]) for row in range(k0, k_final))

    degenerate = 0
    for i in range(m):
        if out_flag[i] == 2:
            report.errors.append((i, "innovation covariance is singular within tolerance"))
            continue
        cid = int(out_label[i])
        state.last_assignments[i] = cid
        report.assignments.append((i, cid, float(out_post[i])))
        state.clusters[cid].last_assigned_frame = frame_idx
        if out_flag[i] == 1:
            degenerate += 1
    if degenerate:
        log.warning("%d degenerate score rows at frame %d; opened new clusters", degenerate, frame_idx)
