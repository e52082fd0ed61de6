"""Domain types, hyperparameter validation, and the live filter state.

Everything here is a plain value: states may be moved freely between
threads as long as each one is mutated by a single caller at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class FilterError(Exception):
    """Base class for tracker runtime failures."""


class NumericError(FilterError):
    """A state-space computation produced or received non-finite values."""


class SingularInnovation(FilterError):
    """The innovation covariance is not invertible within tolerance."""


class DegenerateScoreRow(FilterError):
    """Every association candidate scored exactly zero."""


class LinkMode(Enum):
    """How same-frame measurement links are scored."""

    BBOX = "bbox_signed_distance"
    GRID = "grid_neighbor"
    NONE = "none"


@dataclass
class Measurement:
    """One detection at a frame: a position plus optional extent or grid cell.

    ``position`` is the x/y of a bounding-box center (or a grid-cell center)
    in meters.  ``extent`` is ``(x_half, y_half, heading)``: half-lengths in
    meters along the box axes and the heading in radians.  ``cell_index`` is
    ``(row, col)``.  At most one of extent/cell_index may be set.
    """

    frame: int
    position: np.ndarray
    extent: Optional[tuple[float, float, float]] = None
    cell_index: Optional[tuple[int, int]] = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        if self.position.shape != (2,) or not np.all(np.isfinite(self.position)):
            raise ValueError("position must be a finite 2-vector")
        if self.extent is not None and self.cell_index is not None:
            raise ValueError("extent and cell_index are mutually exclusive")
        if self.extent is not None:
            if len(self.extent) != 3:
                raise ValueError("extent must be (x_half, y_half, heading)")
            self.extent = tuple(float(v) for v in self.extent)
        if self.cell_index is not None:
            self.cell_index = (int(self.cell_index[0]), int(self.cell_index[1]))
        if not self.weight > 0.0:
            raise ValueError("weight must be > 0")


@dataclass
class Cluster:
    """A persistent track: Kalman state plus association bookkeeping.

    ``assign_count`` is a real-valued pseudo-count of absorbed measurements,
    decayed once per frame so that old support fades.  ``frozen_frames``
    counts consecutive frames on which prediction failed numerically; a
    frozen cluster is skipped while frozen and dropped after three frames.
    """

    id: int
    state_mean: np.ndarray
    state_cov: np.ndarray
    assign_count: float
    existence: float
    born_frame: int
    last_assigned_frame: int
    frozen_frames: int = 0

    def position(self) -> np.ndarray:
        return self.state_mean[:2]

    def velocity(self) -> np.ndarray:
        return self.state_mean[2:4]


def _default_meas_noise() -> np.ndarray:
    return 0.04 * np.eye(2)


@dataclass(frozen=True)
class Hyperparameters:
    """All tunables of the tracker.

    alpha: concentration of the mixture; larger opens new tracks more easily.
    gamma: death threshold; tracks with existence below it are pruned.
    a, b: denominators (m^2) of the elliptical position likelihood.
    process_noise_scale: white-noise-acceleration intensity driving Q.
    meas_noise_cov: measurement noise covariance R (m x m).
    survival_prob: per-frame existence retention factor.
    assoc_gain: existence boost toward 1 on every absorbed measurement.
    count_decay: per-frame decay of the association pseudo-count.
    birth_existence: existence assigned to a freshly opened track.
    new_cluster_likelihood: constant standing in for the base-measure
        marginal likelihood of a measurement under a brand-new track.
    dt: frame period in seconds.
    link_scale: length scale (m) of the box signed-distance link kernel.
    link_floor: link value used for a live track with no same-frame
        member yet; 1.0 makes temporal persistence carried entirely by
        the position likelihood and the pseudo-count.
    use_crp_factor: include the occupancy factor alongside the link factor.
    v_max: bound (m/s) used for the uninformed birth velocity variance.
    """

    alpha: float = 1.0
    gamma: float = 0.1
    a: float = 2.0
    b: float = 2.0
    process_noise_scale: float = 1.0
    meas_noise_cov: np.ndarray = field(default_factory=_default_meas_noise)
    survival_prob: float = 0.98
    assoc_gain: float = 0.3
    count_decay: float = 0.7
    birth_existence: float = 0.3
    new_cluster_likelihood: float = 0.05
    dt: float = 0.1
    link_scale: float = 1.0
    link_floor: float = 1.0
    use_crp_factor: bool = True
    v_max: float = 15.0


def validate_hyperparameters(h: Hyperparameters) -> Hyperparameters:
    """Return ``h`` unchanged iff every range constraint holds.

    Raises ValueError naming the offending field and its bound.
    """
    if not h.alpha > 0:
        raise ValueError(f"alpha must be > 0, got {h.alpha}")
    if not 0 < h.gamma < 1:
        raise ValueError(f"gamma must be in (0,1), got {h.gamma}")
    if not h.a > 0:
        raise ValueError(f"a must be > 0, got {h.a}")
    if not h.b > 0:
        raise ValueError(f"b must be > 0, got {h.b}")
    if not h.process_noise_scale >= 0:
        raise ValueError(f"process_noise_scale must be >= 0, got {h.process_noise_scale}")
    if not 0 < h.survival_prob <= 1:
        raise ValueError(f"survival_prob must be in (0,1], got {h.survival_prob}")
    if not 0 < h.assoc_gain <= 1:
        raise ValueError(f"assoc_gain must be in (0,1], got {h.assoc_gain}")
    if not 0 <= h.count_decay <= 1:
        raise ValueError(f"count_decay must be in [0,1], got {h.count_decay}")
    if not 0 < h.birth_existence <= 1:
        raise ValueError(f"birth_existence must be in (0,1], got {h.birth_existence}")
    if not h.new_cluster_likelihood > 0:
        raise ValueError(f"new_cluster_likelihood must be > 0, got {h.new_cluster_likelihood}")
    if not h.dt > 0:
        raise ValueError(f"dt must be > 0, got {h.dt}")
    if not h.link_scale > 0:
        raise ValueError(f"link_scale must be > 0, got {h.link_scale}")
    if not 0 < h.link_floor <= 1:
        raise ValueError(f"link_floor must be in (0,1], got {h.link_floor}")
    if not h.v_max > 0:
        raise ValueError(f"v_max must be > 0, got {h.v_max}")

    r = np.asarray(h.meas_noise_cov, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"meas_noise_cov must be square, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("meas_noise_cov must be finite")
    if np.max(np.abs(r - r.T)) > 1e-9:
        raise ValueError("meas_noise_cov must be symmetric within 1e-9")
    try:
        np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        raise ValueError("meas_noise_cov must be positive definite") from None
    return h


@dataclass
class FilterState:
    """The live set of tracks plus frame bookkeeping.

    ``frame`` counts frames started (one prediction step each), so during
    the processing of the k-th frame (0-based) it reads k+1.
    ``last_assignments`` maps measurement index to cluster id for the frame
    currently being processed; ``prev_assignments`` holds the previous
    frame's map for transition hooks.
    """

    hyper: Hyperparameters
    clusters: dict[int, Cluster] = field(default_factory=dict)
    frame: int = 0
    next_id: int = 0
    last_assignments: dict[int, int] = field(default_factory=dict)
    prev_assignments: dict[int, int] = field(default_factory=dict)

    def current_frame_index(self) -> int:
        """0-based index of the frame being processed (after prediction)."""
        return self.frame - 1


@dataclass
class FrameReport:
    """What happened while processing one frame."""

    frame: int
    assignments: list[tuple[int, int, float]] = field(default_factory=list)
    born: list[int] = field(default_factory=list)
    pruned: list[int] = field(default_factory=list)
    elapsed: float = 0.0
    errors: list[tuple[int, str]] = field(default_factory=list)


def new_filter_state(h: Hyperparameters) -> FilterState:
    """Fresh empty state for a validated hyperparameter set."""
    return FilterState(hyper=validate_hyperparameters(h))


def audit_filter_state(state: FilterState, tol: float = 1e-9) -> None:
    """Walk all clusters and raise FilterError on any invariant violation.

    Intended for debug runs and tests; prohibitively slow only at very
    large cluster counts.
    """
    seen: set[int] = set()
    for cid, c in state.clusters.items():
        if cid != c.id:
            raise FilterError(f"cluster key {cid} != id {c.id}")
        if c.id in seen:
            raise FilterError(f"duplicate cluster id {c.id}")
        seen.add(c.id)
        if c.id >= state.next_id:
            raise FilterError(f"cluster id {c.id} >= next_id {state.next_id}")
        if not 0.0 <= c.existence <= 1.0:
            raise FilterError(f"cluster {c.id}: existence {c.existence} outside [0,1]")
        if not c.assign_count >= 0.0:
            raise FilterError(f"cluster {c.id}: assign_count {c.assign_count} < 0")
        if c.frozen_frames:
            continue  # frozen state is allowed to be stale
        p = c.state_cov
        if np.max(np.abs(p - p.T)) > tol:
            raise FilterError(f"cluster {c.id}: covariance asymmetric beyond {tol}")
        try:
            np.linalg.cholesky(0.5 * (p + p.T))
        except np.linalg.LinAlgError:
            raise FilterError(f"cluster {c.id}: covariance not positive definite") from None
