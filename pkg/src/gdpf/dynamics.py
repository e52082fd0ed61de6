"""Linear-Gaussian state-space prediction and correction.

The shipped model is a planar constant-velocity track with state
(x, y, vx, vy) observed in position only, but ``kf_predict`` and
``kf_update`` are written against generic n-dimensional shapes so that
linearized extensions can reuse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import Hyperparameters, NumericError, SingularInnovation


@dataclass(frozen=True)
class MotionModel:
    """Transition matrix, process noise, and the frame period they assume."""

    transition: np.ndarray
    process_noise: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        phi = np.asarray(self.transition, dtype=float)
        q = np.asarray(self.process_noise, dtype=float)
        object.__setattr__(self, "transition", phi)
        object.__setattr__(self, "process_noise", q)
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise ValueError("transition must be square")
        if q.shape != phi.shape:
            raise ValueError("process_noise must match transition shape")
        if np.max(np.abs(q - q.T)) > 1e-9:
            raise ValueError("process_noise must be symmetric within 1e-9")
        if np.any(np.linalg.eigvalsh(0.5 * (q + q.T)) < -1e-9):
            raise ValueError("process_noise must be positive semidefinite")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")


@dataclass(frozen=True)
class MeasurementModel:
    """Observation matrix C (m x n) and measurement noise R (m x m)."""

    observation: np.ndarray
    noise: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.observation, dtype=float)
        r = np.asarray(self.noise, dtype=float)
        object.__setattr__(self, "observation", c)
        object.__setattr__(self, "noise", r)
        if c.ndim != 2:
            raise ValueError("observation must be an m x n matrix")
        if r.shape != (c.shape[0], c.shape[0]):
            raise ValueError("noise must be m x m")
        if np.max(np.abs(r - r.T)) > 1e-9:
            raise ValueError("noise must be symmetric within 1e-9")
        try:
            np.linalg.cholesky(r)
        except np.linalg.LinAlgError:
            raise ValueError("noise must be positive definite") from None


def cv_model(dt: float, q: float) -> MotionModel:
    """Constant-velocity model with discrete white-noise-acceleration Q.

    State order is (x, y, vx, vy).  ``q`` scales the per-axis noise block
    [[dt^4/4, dt^3/2], [dt^3/2, dt^2]].
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if q < 0:
        raise ValueError("q must be >= 0")
    phi = np.array(
        [
            [1.0, 0.0, dt, 0.0],
            [0.0, 1.0, 0.0, dt],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    t2 = dt * dt
    t3 = t2 * dt / 2.0
    t4 = t2 * t2 / 4.0
    qm = q * np.array(
        [
            [t4, 0.0, t3, 0.0],
            [0.0, t4, 0.0, t3],
            [t3, 0.0, t2, 0.0],
            [0.0, t3, 0.0, t2],
        ]
    )
    return MotionModel(transition=phi, process_noise=qm, dt=dt)


def position_measurement_model(noise: np.ndarray) -> MeasurementModel:
    """Observe (x, y) out of the (x, y, vx, vy) state."""
    c = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
    return MeasurementModel(observation=c, noise=np.asarray(noise, dtype=float))


def models_from_hyper(h: Hyperparameters) -> tuple[MotionModel, MeasurementModel]:
    return (
        cv_model(h.dt, h.process_noise_scale),
        position_measurement_model(h.meas_noise_cov),
    )


def kf_predict(
    mean: np.ndarray, cov: np.ndarray, model: MotionModel
) -> tuple[np.ndarray, np.ndarray]:
    """Time update: mean' = Phi mean, cov' = Phi cov Phi^T + Q (symmetrized)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericError("non-finite state passed to kf_predict")
    phi = model.transition
    new_mean = phi @ mean
    new_cov = phi @ cov @ phi.T + model.process_noise
    new_cov = 0.5 * (new_cov + new_cov.T)
    if not (np.all(np.isfinite(new_mean)) and np.all(np.isfinite(new_cov))):
        raise NumericError("kf_predict produced non-finite state")
    return new_mean, new_cov


def gaussian_density(residual: np.ndarray, cov: np.ndarray) -> float:
    """Density of N(0, cov) at ``residual``.

    Uses a Cholesky factor, so it shares the singularity test applied by
    ``kf_update``.
    """
    residual = np.asarray(residual, dtype=float)
    cov = np.asarray(cov, dtype=float)
    m = residual.shape[0]
    chol = _checked_cholesky(cov)
    z = np.linalg.solve(chol, residual)
    quad = float(z @ z)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return math.exp(-0.5 * (quad + logdet + m * math.log(2.0 * math.pi)))


def _checked_cholesky(s: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(s)):
        raise SingularInnovation("innovation covariance is not finite")
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        raise SingularInnovation("innovation covariance is not positive definite") from None
    d = np.diag(chol)
    if np.min(d) <= 1e-12 * max(float(np.max(d)), 1.0):
        raise SingularInnovation("innovation covariance is singular within tolerance")
    return chol


def kf_update(
    mean: np.ndarray, cov: np.ndarray, y: np.ndarray, model: MeasurementModel
) -> tuple[np.ndarray, np.ndarray, float]:
    """Measurement update in Joseph form; returns the innovation likelihood.

    The Joseph form (I-KC) P (I-KC)^T + K R K^T keeps long-lived tracks'
    covariances symmetric and positive definite at small R.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite input passed to kf_update")
    c = model.observation
    r = model.noise

    s = c @ cov @ c.T + r
    s = 0.5 * (s + s.T)
    _checked_cholesky(s)

    innovation = y - c @ mean
    gain = np.linalg.solve(s.T, (cov @ c.T).T).T
    new_mean = mean + gain @ innovation

    ikc = np.eye(cov.shape[0]) - gain @ c
    new_cov = ikc @ cov @ ikc.T + gain @ r @ gain.T
    new_cov = 0.5 * (new_cov + new_cov.T)

    likelihood = gaussian_density(innovation, s)
    return new_mean, new_cov, likelihood


def birth_state(
    position: np.ndarray, meas_noise: np.ndarray, v_max: float
) -> tuple[np.ndarray, np.ndarray]:
    """Uninformed-velocity birth: position from the measurement, velocity 0.

    Position variance inflates the measurement noise diagonal 4x; velocity
    variance is v_max^2 / 3 (uniform speed prior on [-v_max, v_max]).
    """
    r = np.asarray(meas_noise, dtype=float)
    mean = np.array([position[0], position[1], 0.0, 0.0])
    vvar = v_max * v_max / 3.0
    cov = np.diag([4.0 * r[0, 0], 4.0 * r[1, 1], vvar, vvar])
    return mean, cov
