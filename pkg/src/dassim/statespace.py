"""Forced spring-mass model, forward-Euler discretization, and synthetic data.

This is the twin-experiment data source: simulate a noisy "truth" trajectory
of the damped forced oscillator, then observe it through a linear measurement
with additive Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import sample_mvn

Forcing = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class ContinuousSystem:
    """Linear time-invariant dynamics x'(t) = A x(t) + B u(t).

    A maps state to state rate (units 1/s); u(t) is the control/forcing
    vector at time t in seconds.
    """

    A: np.ndarray
    B: np.ndarray
    forcing: Forcing

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise ValueError(f"B rows must match A, got {B.shape} vs {A.shape}")
        if not (np.isfinite(A).all() and np.isfinite(B).all()):
            raise ValueError("system matrices must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class DiscreteModel:
    """One-step model x_k = Ad x_{k-1} + Bd u(t_{k-1}) + w,  w ~ N(0, Q).

    Q is the per-step process-noise covariance. The forcing is always
    evaluated at the step-start time t_{k-1}, both here and in the filters.
    """

    Ad: np.ndarray
    Bd: np.ndarray
    Q: np.ndarray
    dt: float
    forcing: Forcing

    def __post_init__(self):
        Ad = np.asarray(self.Ad, dtype=float)
        Bd = np.asarray(self.Bd, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        n = Ad.shape[0]
        if Ad.ndim != 2 or Ad.shape != (n, n):
            raise ValueError(f"Ad must be square, got {Ad.shape}")
        if Bd.ndim != 2 or Bd.shape[0] != n:
            raise ValueError(f"Bd rows must match Ad, got {Bd.shape}")
        if Q.shape != (n, n) or not np.allclose(Q, Q.T, atol=1e-10) or (np.diag(Q) < 0).any():
            raise ValueError("Q must be symmetric positive semidefinite with shape matching Ad")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "Ad", Ad)
        object.__setattr__(self, "Bd", Bd)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.Ad.shape[0]

    def control(self, t: float) -> np.ndarray:
        """Discrete control increment Bd @ u(t)."""
        return self.Bd @ np.asarray(self.forcing(t), dtype=float)


@dataclass(frozen=True)
class ObservationModel:
    """Measurement z = H x + v,  v ~ N(0, R).

    R must be symmetric; an exactly-zero R is accepted and means noiseless
    observations (useful for limit checks).
    """

    H: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        R = np.asarray(self.R, dtype=float)
        if H.ndim != 2:
            raise ValueError(f"H must be 2-D, got ndim={H.ndim}")
        q = H.shape[0]
        if R.shape != (q, q) or not np.allclose(R, R.T, atol=1e-10) or (np.diag(R) < 0).any():
            raise ValueError(f"R must be symmetric PSD with shape ({q}, {q})")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)


@dataclass(frozen=True)
class Trajectory:
    """States indexed by step: row k is the state at time t_k = k * dt."""

    dt: float
    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError("states must be a non-empty (steps+1, n) array")
        if not np.isfinite(states).all():
            raise ValueError("states must be finite")
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self))


def second_order_to_state_space(
    damping: float, stiffness: float, forcing_amplitude: float, forcing_freq: float
) -> ContinuousSystem:
    """First-order system for y'' + damping*y' + stiffness*y = amp*cos(freq*t).

    State is (y, y'); the cosine drive enters through the second component.
    """
    A = np.array([[0.0, 1.0], [-stiffness, -damping]])
    B = np.eye(2)

    def forcing(t: float) -> np.ndarray:
        return np.array([0.0, forcing_amplitude * np.cos(forcing_freq * t)])

    return ContinuousSystem(A=A, B=B, forcing=forcing)


def spring_mass_default(r_var: float):
    """Benchmark setup: damped spring-mass with a 3*cos(2t) drive.

    Returns ``(system, observation_model, truth_x0, guess_x0, P0, Q)``.
    Only the first state component is observed. The observation-noise
    variance ``r_var`` is an experiment-level choice, so the caller always
    supplies it.
    """
    if r_var < 0:
        raise ValueError(f"r_var must be >= 0, got {r_var}")
    system = second_order_to_state_space(damping=0.45, stiffness=1.0, forcing_amplitude=3.0, forcing_freq=2.0)
    obs = ObservationModel(H=np.array([[1.0, 0.0]]), R=np.array([[r_var]]))
    truth_x0 = np.array([2.0, 0.0])
    guess_x0 = np.array([0.0, 0.0])
    P0 = 0.05 * np.eye(2)
    Q = 0.0005 * np.eye(2)
    return system, obs, truth_x0, guess_x0, P0, Q


def discretize(system: ContinuousSystem, dt: float, Q: np.ndarray) -> DiscreteModel:
    """Forward-Euler discretization: Ad = I + dt*A, Bd = dt*B.

    Q is stored unchanged as the per-step noise covariance (it is not scaled
    by dt).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = system.A.shape[0]
    return DiscreteModel(
        Ad=np.eye(n) + dt * system.A,
        Bd=dt * system.B,
        Q=np.asarray(Q, dtype=float),
        dt=dt,
        forcing=system.forcing,
    )


def simulate_truth(
    model: DiscreteModel, x0: np.ndarray, steps: int, rng: np.random.Generator
) -> Trajectory:
    """Simulate steps of the noisy discrete model, returning steps+1 states.

    With Q = 0 the run is deterministic and consumes nothing from ``rng``.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dim,):
        raise ValueError(f"x0 shape {x0.shape} does not match model dimension {model.dim}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    zero = np.zeros(model.dim)
    states = np.empty((steps + 1, model.dim))
    states[0] = x0
    for k in range(1, steps + 1):
        t_prev = (k - 1) * model.dt
        noise = sample_mvn(zero, model.Q, rng)
        states[k] = model.Ad @ states[k - 1] + model.control(t_prev) + noise
    return Trajectory(dt=model.dt, states=states)


def generate_observations(
    truth: Trajectory, obs: ObservationModel, rng: np.random.Generator
) -> np.ndarray:
    """Observe every trajectory entry: z_k = H x_k + v_k, v_k ~ N(0, R)."""
    if obs.H.shape[1] != truth.states.shape[1]:
        raise ValueError(f"H columns {obs.H.shape[1]} do not match state dimension {truth.states.shape[1]}")
    q = obs.H.shape[0]
    zero = np.zeros(q)
    out = np.empty((len(truth), q))
    for k in range(len(truth)):
        out[k] = obs.H @ truth.states[k] + sample_mvn(zero, obs.R, rng)
    return out
