"""The per-frame tracking loop: predict, greedily label, update, prune.

Measurements are processed strictly in the order given by the caller;
the greedy sequence is order-dependent by construction, so a fixed input
order makes the whole frame deterministic.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import MeasurementModel, MotionModel, birth_state, kf_predict, kf_update
from .priors import NEW_LABEL, LinkContext, TransitionFn, assignment_posterior
from .types import (
    Cluster,
    DegenerateScoreRow,
    FilterState,
    FrameReport,
    LinkMode,
    Measurement,
    NumericError,
    audit_filter_state,
)

log = logging.getLogger(__name__)

# Consecutive failed predictions before a numerically broken track is dropped.
FROZEN_FRAME_LIMIT = 3


@dataclass(frozen=True)
class TrackEstimate:
    """Snapshot of one live track for downstream consumers."""

    id: int
    position: np.ndarray
    velocity: np.ndarray
    existence: float
    moving: bool


def predict_frame(state: FilterState, model: MotionModel) -> FilterState:
    """Advance every track one frame and decay its bookkeeping.

    Tracks whose prediction fails numerically are frozen in place (state
    untouched, flagged) rather than dropped; existence and pseudo-count
    decay regardless.
    """
    h = state.hyper
    state.frame += 1
    state.prev_assignments = state.last_assignments
    state.last_assignments = {}
    for c in state.clusters.values():
        c.existence *= h.survival_prob
        c.assign_count *= h.count_decay
        try:
            c.state_mean, c.state_cov = kf_predict(c.state_mean, c.state_cov, model)
            c.frozen_frames = 0
        except NumericError:
            c.frozen_frames += 1
            log.warning(
                "cluster %d frozen during predict (%d consecutive frames)",
                c.id,
                c.frozen_frames,
            )
    return state


def choose_best_label(
    y_i: Measurement,
    state: FilterState,
    ctx: LinkContext,
    *,
    transition: Optional[TransitionFn] = None,
) -> tuple[int, float]:
    """Greedy argmax over the posterior row for one measurement.

    Ties break toward an existing cluster (NEW loses all ties), then the
    larger pseudo-count, then the smaller id.  A degenerate all-zero row
    falls back to NEW with posterior 1.
    """
    candidates = [c for c in state.clusters.values() if c.frozen_frames == 0]
    try:
        row = assignment_posterior(
            y_i,
            candidates,
            ctx,
            state.hyper,
            previous_assignments=state.prev_assignments,
            transition=transition,
        )
    except DegenerateScoreRow:
        log.warning("degenerate score row at frame %d; opening a new cluster", state.frame - 1)
        return NEW_LABEL, 1.0

    counts = {c.id: c.assign_count for c in candidates}
    best = 0
    for i in range(1, len(row.labels)):
        if row.raw[i] > row.raw[best]:
            best = i
        elif row.raw[i] == row.raw[best]:
            # labels are ascending with NEW last, so keeping the earlier
            # index already prefers existing over NEW and smaller ids.
            if (
                row.labels[i] != NEW_LABEL
                and row.labels[best] != NEW_LABEL
                and counts[row.labels[i]] > counts[row.labels[best]]
            ):
                best = i
    return row.labels[best], float(row.posterior[best])


def apply_assignment(
    state: FilterState,
    y_i: Measurement,
    label: int,
    meas_model: MeasurementModel,
    *,
    meas_index: Optional[int] = None,
) -> FilterState:
    """Commit one label choice: open a track or Kalman-correct an existing one.

    On a singular innovation the cluster is left unmodified and the error
    propagates; the caller records the measurement as unassigned.
    """
    h = state.hyper
    idx = meas_index if meas_index is not None else len(state.last_assignments)
    frame_idx = state.current_frame_index()

    if label == NEW_LABEL:
        mean, cov = birth_state(y_i.position, meas_model.noise, h.v_max)
        c = Cluster(
            id=state.next_id,
            state_mean=mean,
            state_cov=cov,
            assign_count=1.0,
            existence=h.birth_existence,
            born_frame=frame_idx,
            last_assigned_frame=frame_idx,
        )
        state.clusters[c.id] = c
        state.next_id += 1
        state.last_assignments[idx] = c.id
        return state

    c = state.clusters[label]
    mean, cov, _ = kf_update(c.state_mean, c.state_cov, y_i.position, meas_model)
    c.state_mean = mean
    c.state_cov = cov
    c.assign_count += y_i.weight
    c.existence = c.existence + (1.0 - c.existence) * h.assoc_gain
    c.last_assigned_frame = frame_idx
    state.last_assignments[idx] = c.id
    return state


def prune_components(state: FilterState) -> tuple[FilterState, list[int]]:
    """Remove exactly the clusters whose existence fell below the threshold."""
    gamma = state.hyper.gamma
    pruned = [cid for cid, c in state.clusters.items() if c.existence < gamma]
    for cid in pruned:
        del state.clusters[cid]
    return state, pruned


def process_frame(
    state: FilterState,
    measurements: Sequence[Measurement],
    motion: MotionModel,
    meas_model: MeasurementModel,
    link_mode: LinkMode = LinkMode.NONE,
    *,
    transition: Optional[TransitionFn] = None,
    backend: Optional[str] = None,
    audit: bool = False,
) -> tuple[FilterState, FrameReport]:
    """Run one full frame: predict, assign every measurement, prune.

    Per-measurement failures are recorded in the report and the frame
    always completes.  ``backend`` selects the measurement-loop
    implementation ("fast"/"python", default resolved at import time).
    """
    from . import backends

    t0 = time.perf_counter()
    if measurements:
        frames = {m.frame for m in measurements}
        if len(frames) > 1:
            raise ValueError(f"measurements span multiple frames: {sorted(frames)}")

    predict_frame(state, motion)
    report = FrameReport(frame=state.current_frame_index())

    if measurements:
        loop = backends.resolve(backend, state, measurements, meas_model, link_mode, transition)
        loop(state, measurements, meas_model, link_mode, transition, report)

    stale = [c.id for c in state.clusters.values() if c.frozen_frames >= FROZEN_FRAME_LIMIT]
    for cid in stale:
        del state.clusters[cid]
    _, pruned = prune_components(state)
    report.pruned = sorted(stale + pruned)

    report.elapsed = time.perf_counter() - t0
    if audit:
        audit_filter_state(state)
    return state, report


def estimates(state: FilterState, speed_threshold: float = 0.5) -> list[TrackEstimate]:
    """One estimate per live (non-frozen) track, in ascending id order."""
    if speed_threshold < 0:
        raise ValueError("speed_threshold must be >= 0")
    out = []
    for c in state.clusters.values():
        if c.frozen_frames:
            continue
        vx, vy = float(c.state_mean[2]), float(c.state_mean[3])
        speed = math.hypot(vx, vy)
        out.append(
            TrackEstimate(
                id=c.id,
                position=np.array([c.state_mean[0], c.state_mean[1]]),
                velocity=np.array([vx, vy]),
                existence=c.existence,
                moving=speed > speed_threshold,
            )
        )
    return out
