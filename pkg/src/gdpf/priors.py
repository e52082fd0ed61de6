"""Association probability factors and the normalized label posterior.

Each measurement of a frame is scored against every live track plus one
NEW candidate.  The unnormalized score of track k is the product

    link(k) * occupancy(k) * position_likelihood(k) * transition(k)

where ``link`` is a distance-dependent factor over measurements already
assigned this frame, ``occupancy`` is the usual sequential-seating weight
n_k / (i + alpha), and the position likelihood is an elliptical kernel
around the track's predicted position.  The NEW candidate scores
alpha (self-link) * alpha / (i + alpha) * new_cluster_likelihood.
All candidates, NEW included, are normalized into one distribution so the
greedy argmax acts on a proper posterior row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .types import Cluster, DegenerateScoreRow, Hyperparameters, LinkMode, Measurement

# Label of the "open a new track" candidate; real track ids are >= 0.
NEW_LABEL = -1

TransitionFn = Callable[[int, Mapping[int, int]], float]


@dataclass
class LinkContext:
    """Within-frame view used by the link factor.

    ``assigned`` maps the index of each already-processed measurement of
    this frame to the cluster id it joined; ``processed_count`` is the
    number of measurements already assigned this frame.
    """

    current_frame_measurements: Sequence[Measurement]
    processed_count: int = 0
    link_mode: LinkMode = LinkMode.NONE
    assigned: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoreRow:
    """Raw and normalized association scores for one measurement.

    ``labels`` lists existing cluster ids in ascending order followed by
    NEW_LABEL; ``posterior`` sums to 1.
    """

    labels: tuple[int, ...]
    raw: np.ndarray
    posterior: np.ndarray

    @classmethod
    def from_raw(cls, labels: Sequence[int], raw: Sequence[float]) -> "ScoreRow":
        raw_arr = np.asarray(raw, dtype=float)
        if raw_arr.ndim != 1 or len(labels) != raw_arr.shape[0]:
            raise ValueError("labels and raw scores must align")
        if np.any(raw_arr < 0) or not np.all(np.isfinite(raw_arr)):
            raise ValueError("raw scores must be finite and >= 0")
        total = float(raw_arr.sum())
        if total <= 0.0:
            raise DegenerateScoreRow("all association candidates scored zero")
        return cls(labels=tuple(int(l) for l in labels), raw=raw_arr, posterior=raw_arr / total)


def crp_weight(n_k: float, processed_count: int, alpha: float, is_new: bool) -> float:
    """Sequential seating weight with an already-assigned count in the denominator.

    Existing: n_k / (processed_count + alpha).  NEW: alpha / (processed_count
    + alpha).  ``processed_count`` is the number of measurements already
    assigned this frame, so the first measurement sees denominator alpha.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if processed_count < 0:
        raise ValueError("processed_count must be >= 0")
    if is_new:
        return alpha / (processed_count + alpha)
    if n_k < 0:
        raise ValueError("n_k must be >= 0")
    return n_k / (processed_count + alpha)


def box_signed_distance(
    point: np.ndarray, center: np.ndarray, extent: tuple[float, float, float]
) -> float:
    """Signed distance from ``point`` to the nearest side of an oriented box.

    Negative inside, zero on the boundary, positive outside.
    """
    hx, hy, heading = extent
    ch = math.cos(heading)
    sh = math.sin(heading)
    dx = float(point[0]) - float(center[0])
    dy = float(point[1]) - float(center[1])
    rx = ch * dx + sh * dy
    ry = -sh * dx + ch * dy
    qx = abs(rx) - hx
    qy = abs(ry) - hy
    ox = max(qx, 0.0)
    oy = max(qy, 0.0)
    return math.sqrt(ox * ox + oy * oy) + min(max(qx, qy), 0.0)


def bbox_link_prior(y_i: Measurement, y_l: Measurement, scale: float) -> float:
    """exp(-max(s, 0)/scale) of the signed distance from y_i's center to y_l's box.

    Equals 1 when the center lies inside or on the box.
    """
    if y_i.extent is None or y_l.extent is None:
        raise ValueError("bbox link mode requires measurements with an extent")
    if not scale > 0:
        raise ValueError("scale must be > 0")
    s = box_signed_distance(y_i.position, y_l.position, y_l.extent)
    return math.exp(-max(s, 0.0) / scale)


def grid_link_prior(y_i: Measurement, y_l: Measurement) -> float:
    """1 if the two cells are identical or 8-neighbors, else 0."""
    if y_i.cell_index is None or y_l.cell_index is None:
        raise ValueError("grid link mode requires measurements with a cell_index")
    dr = abs(y_i.cell_index[0] - y_l.cell_index[0])
    dc = abs(y_i.cell_index[1] - y_l.cell_index[1])
    return 1.0 if max(dr, dc) <= 1 else 0.0


def ddcrp_prior(
    y_i: Measurement,
    candidate: Union[Cluster, int, None],
    ctx: LinkContext,
    alpha: float,
    *,
    link_scale: float = 1.0,
    link_floor: float = 1.0,
) -> float:
    """Link factor: alpha for the self-link, otherwise the best link into
    the candidate's same-frame members.

    A live cluster with no member this frame yet scores ``link_floor``;
    link_mode NONE scores every existing cluster 1 (plain seating fallback).
    """
    if candidate is None or (isinstance(candidate, int) and candidate == NEW_LABEL):
        return alpha
    cid = candidate.id if isinstance(candidate, Cluster) else int(candidate)
    if ctx.link_mode is LinkMode.NONE:
        return 1.0
    best: Optional[float] = None
    for idx, assigned_cid in ctx.assigned.items():
        if assigned_cid != cid:
            continue
        member = ctx.current_frame_measurements[idx]
        if ctx.link_mode is LinkMode.BBOX:
            lp = bbox_link_prior(y_i, member, link_scale)
        else:
            lp = grid_link_prior(y_i, member)
        if best is None or lp > best:
            best = lp
    return link_floor if best is None else best


def best_links(
    y_i: Measurement, ctx: LinkContext, *, link_scale: float = 1.0
) -> dict[int, float]:
    """Best same-frame link from ``y_i`` into each cluster, in one pass.

    Returns {cluster id: max link prior over that cluster's same-frame
    members}; clusters with no member this frame are absent.  Matches
    ``ddcrp_prior`` candidate by candidate.
    """
    best: dict[int, float] = {}
    if ctx.link_mode is LinkMode.NONE:
        return best
    for idx, cid in ctx.assigned.items():
        member = ctx.current_frame_measurements[idx]
        if ctx.link_mode is LinkMode.BBOX:
            lp = bbox_link_prior(y_i, member, link_scale)
        else:
            lp = grid_link_prior(y_i, member)
        cur = best.get(cid)
        if cur is None or lp > cur:
            best[cid] = lp
    return best


def car_prior_likelihood(y_i: Measurement, cluster: Cluster, a: float, b: float) -> float:
    """Elliptical position likelihood around the track's predicted position:

        exp(-((x_k - z_x)^2 / a + (y_k - z_y)^2 / b))
    """
    dx = float(cluster.state_mean[0]) - float(y_i.position[0])
    dy = float(cluster.state_mean[1]) - float(y_i.position[1])
    return math.exp(-(dx * dx / a + dy * dy / b))


def transition_prior(cluster_id: int, previous_assignments: Mapping[int, int]) -> float:
    """Uniform label transition between frames; the pluggable default."""
    return 1.0


def assignment_posterior(
    y_i: Measurement,
    clusters: Sequence[Cluster],
    ctx: LinkContext,
    h: Hyperparameters,
    *,
    previous_assignments: Optional[Mapping[int, int]] = None,
    transition: Optional[TransitionFn] = None,
) -> ScoreRow:
    """Score ``y_i`` against every candidate cluster plus NEW and normalize.

    ``clusters`` must already be predicted for the current frame.  Raises
    DegenerateScoreRow when every candidate scores exactly zero.
    """
    trans = transition if transition is not None else transition_prior
    prev = previous_assignments if previous_assignments is not None else {}
    ordered = sorted(clusters, key=lambda c: c.id)

    labels = [c.id for c in ordered]
    links = best_links(y_i, ctx, link_scale=h.link_scale)
    raw = []
    for c in ordered:
        if ctx.link_mode is LinkMode.NONE:
            dd = 1.0
        else:
            dd = links.get(c.id, h.link_floor)
        occ = crp_weight(c.assign_count, ctx.processed_count, h.alpha, False) if h.use_crp_factor else 1.0
        lik = car_prior_likelihood(y_i, c, h.a, h.b)
        raw.append(dd * occ * lik * trans(c.id, prev))

    dd_new = ddcrp_prior(y_i, NEW_LABEL, ctx, h.alpha)
    occ_new = crp_weight(0.0, ctx.processed_count, h.alpha, True) if h.use_crp_factor else 1.0
    raw.append(dd_new * occ_new * h.new_cluster_likelihood * trans(NEW_LABEL, prev))
    labels.append(NEW_LABEL)

    return ScoreRow.from_raw(labels, raw)
