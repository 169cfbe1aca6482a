"""Classical Kalman filter: predict, gain, update, and the filtering loop.

The covariance update is available in two algebraically equivalent forms:
the simplified ``(I-KH)P'`` and the Joseph form
``(I-KH)P'(I-KH)^T + KRK^T``. Joseph is the default because it stays
positive semidefinite under roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import NotPositiveDefiniteError, cholesky, invert
from .statespace import DiscreteModel, ObservationModel

COV_FORMS = ("simplified", "joseph")


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + p.T)


@dataclass(frozen=True)
class GaussianState:
    """State estimate as a Gaussian: mean vector and error covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        n = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (n, n):
            raise ValueError(f"mean {mean.shape} and cov {cov.shape} are inconsistent")
        if np.abs(cov - cov.T).max() > 1e-10:
            raise ValueError("covariance must be symmetric within 1e-10")
        try:
            cholesky(cov + 1e-12 * np.eye(n))
        except NotPositiveDefiniteError as exc:
            raise ValueError(f"covariance is not positive semidefinite: {exc}") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def predict(prev: GaussianState, model: DiscreteModel, t_prev: float) -> GaussianState:
    """Forecast step: mean through the model, covariance through Ad plus Q."""
    if prev.mean.shape[0] != model.dim:
        raise ValueError(f"state dimension {prev.mean.shape[0]} does not match model {model.dim}")
    mean = model.Ad @ prev.mean + model.control(t_prev)
    cov = model.Ad @ prev.cov @ model.Ad.T + model.Q
    return GaussianState(mean=mean, cov=_symmetrize(cov))


def kalman_gain(p_prior: np.ndarray, H: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Minimum-trace gain K = P' H^T (H P' H^T + R)^{-1}."""
    p_prior = np.asarray(p_prior, dtype=float)
    H = np.asarray(H, dtype=float)
    R = np.asarray(R, dtype=float)
    innovation_cov = H @ p_prior @ H.T + R
    return p_prior @ H.T @ invert(innovation_cov)


def update(
    prior: GaussianState, z: np.ndarray, obs: ObservationModel, form: str = "joseph"
) -> GaussianState:
    """Assimilate one observation into the prior state.

    ``form`` selects the covariance update: "joseph" (default) or
    "simplified".
    """
    if form not in COV_FORMS:
        raise ValueError(f"form must be one of {COV_FORMS}, got {form!r}")
    z = np.asarray(z, dtype=float)
    K = kalman_gain(prior.cov, obs.H, obs.R)
    mean = prior.mean + K @ (z - obs.H @ prior.mean)
    i_kh = np.eye(prior.mean.shape[0]) - K @ obs.H
    if form == "joseph":
        cov = i_kh @ prior.cov @ i_kh.T + K @ obs.R @ K.T
    else:
        cov = i_kh @ prior.cov
    return GaussianState(mean=mean, cov=_symmetrize(cov))


def run_kf(
    model: DiscreteModel,
    obs: ObservationModel,
    observations: Sequence[np.ndarray | None],
    x0: np.ndarray,
    P0: np.ndarray,
    form: str = "joseph",
    analyze_initial: bool = False,
) -> list[GaussianState]:
    """Filter a whole observation sequence; returns one analysis per step.

    Index 0 is the initial state (x0, P0); assimilation starts at k = 1, so
    observations[0] is unused unless ``analyze_initial`` is set. A ``None``
    entry means no observation at that step (predict only).
    """
    if len(observations) == 0:
        raise ValueError("observations must be non-empty")
    state = GaussianState(mean=np.asarray(x0, dtype=float), cov=np.asarray(P0, dtype=float))
    if analyze_initial and observations[0] is not None:
        state = update(state, observations[0], obs, form)
    analyses = [state]
    for k in range(1, len(observations)):
        state = predict(state, model, (k - 1) * model.dt)
        if observations[k] is not None:
            state = update(state, observations[k], obs, form)
        analyses.append(state)
    return analyses
