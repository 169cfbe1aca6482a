"""Ensemble Kalman filter with perturbed observations.

An ensemble is a plain ``(m, n)`` array: m member state vectors as rows.
The gain is built from the ensemble sample covariance, and every member is
updated against its own noisy copy of the observation, which keeps the
posterior spread statistically correct.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .linalg import cholesky, invert
from .statespace import DiscreteModel, ObservationModel


def init_ensemble(
    x0: np.ndarray, P0: np.ndarray, m: int, rng: np.random.Generator
) -> np.ndarray:
    """m independent draws from N(x0, P0), one per row."""
    if m < 2:
        raise ValueError(f"ensemble size must be >= 2, got {m}")
    x0 = np.asarray(x0, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    if not P0.any():
        return np.tile(x0, (m, 1))
    lower = cholesky(P0)
    return x0 + rng.standard_normal((m, x0.shape[0])) @ lower.T


def ensemble_mean(ensemble: np.ndarray) -> np.ndarray:
    """Arithmetic mean over members."""
    return np.asarray(ensemble, dtype=float).mean(axis=0)


def ensemble_covariance(ensemble: np.ndarray) -> np.ndarray:
    """Unbiased sample covariance (1/(m-1) normalization), symmetrized."""
    ensemble = np.asarray(ensemble, dtype=float)
    m = ensemble.shape[0]
    if m < 2:
        raise ValueError(f"sample covariance needs >= 2 members, got {m}")
    anomalies = ensemble - ensemble.mean(axis=0)
    cov = anomalies.T @ anomalies / (m - 1)
    return 0.5 * (cov + cov.T)


def forecast_ensemble(
    ensemble: np.ndarray,
    model: DiscreteModel,
    t_prev: float,
    rng: np.random.Generator,
    add_noise: bool = True,
) -> np.ndarray:
    """Propagate every member one step, plus an independent N(0, Q) draw each.

    Without the noise (add_noise=False, or Q = 0) the ensemble spread decays
    with the damped dynamics and the filter eventually ignores observations,
    so noisy forecasts are the default.
    """
    ensemble = np.asarray(ensemble, dtype=float)
    m, n = ensemble.shape
    if n != model.dim:
        raise ValueError(f"member dimension {n} does not match model {model.dim}")
    out = ensemble @ model.Ad.T + model.control(t_prev)
    if add_noise and model.Q.any():
        out = out + rng.standard_normal((m, n)) @ cholesky(model.Q).T
    return out


def perturb_observation(
    z: np.ndarray, R: np.ndarray, m: int, rng: np.random.Generator
) -> np.ndarray:
    """m noisy copies of one observation: rows z + u_i, u_i ~ N(0, R)."""
    z = np.asarray(z, dtype=float)
    R = np.asarray(R, dtype=float)
    if not R.any():
        return np.tile(z, (m, 1))
    lower = cholesky(R)
    return z + rng.standard_normal((m, z.shape[0])) @ lower.T


def enkf_update(
    forecast: np.ndarray,
    z: np.ndarray,
    obs: ObservationModel,
    rng: np.random.Generator,
    cov_ensemble: np.ndarray | None = None,
) -> np.ndarray:
    """Update every member with its own perturbed observation.

    The gain uses the sample covariance of ``forecast`` (the standard
    reading). ``cov_ensemble`` substitutes a different ensemble as the
    covariance source, which reproduces the literal prior-step-statistics
    variant; see :func:`run_enkf`.
    """
    forecast = np.asarray(forecast, dtype=float)
    m = forecast.shape[0]
    perturbed = perturb_observation(z, obs.R, m, rng)
    p_e = ensemble_covariance(forecast if cov_ensemble is None else cov_ensemble)
    gain = p_e @ obs.H.T @ invert(obs.H @ p_e @ obs.H.T + obs.R)
    return forecast + (perturbed - forecast @ obs.H.T) @ gain.T


def run_enkf(
    model: DiscreteModel,
    obs: ObservationModel,
    observations: Sequence[np.ndarray | None],
    x0: np.ndarray,
    P0: np.ndarray,
    m: int,
    rng: np.random.Generator,
    add_noise: bool = True,
    lagged_covariance: bool = False,
    analyze_initial: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Full ensemble filter loop; returns per-step (means, covariances).

    Mirrors :func:`dassim.kalman.run_kf`: index 0 reports the initial
    ensemble, assimilation starts at k = 1, and each step forecasts the
    members, then perturbs the observation, computes the sample statistics
    and gain, and updates the members. ``None`` observations are forecast
    through. ``lagged_covariance=True`` builds the gain from the previous
    step's members instead of the current forecast (non-standard; kept only
    to mimic the literal prior-step covariance formula).
    """
    if len(observations) == 0:
        raise ValueError("observations must be non-empty")
    ensemble = init_ensemble(x0, P0, m, rng)
    if analyze_initial and observations[0] is not None:
        ensemble = enkf_update(ensemble, observations[0], obs, rng)
    means = np.empty((len(observations), ensemble.shape[1]))
    covs = np.empty((len(observations), ensemble.shape[1], ensemble.shape[1]))
    means[0] = ensemble_mean(ensemble)
    covs[0] = ensemble_covariance(ensemble)
    for k in range(1, len(observations)):
        previous = ensemble
        ensemble = forecast_ensemble(ensemble, model, (k - 1) * model.dt, rng, add_noise)
        if observations[k] is not None:
            ensemble = enkf_update(
                ensemble,
                observations[k],
                obs,
                rng,
                cov_ensemble=previous if lagged_covariance else None,
            )
        means[k] = ensemble_mean(ensemble)
        covs[k] = ensemble_covariance(ensemble)
    return means, covs
