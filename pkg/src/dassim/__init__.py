"""dassim: data assimilation on small linear state-space models.

Kalman filter, perturbed-observation ensemble Kalman filter, and 3D-Var
(closed form, gradient descent, and Tikhonov/ridge reformulation), plus a
twin-experiment harness around a forced spring-mass benchmark.
"""

from .enkf import (
    enkf_update,
    ensemble_covariance,
    ensemble_mean,
    forecast_ensemble,
    init_ensemble,
    perturb_observation,
    run_enkf,
)
from .harness import ExperimentConfig, RunResult, open_loop_forecast, rmse, run_experiment, write_csv, write_metrics
from .kalman import GaussianState, kalman_gain, predict, run_kf, update
from .linalg import (
    NotPositiveDefiniteError,
    SingularMatrixError,
    cholesky,
    invert,
    mat_mul,
    rng_stream,
    sample_mvn,
    trace,
    transpose,
)
from .statespace import (
    ContinuousSystem,
    DiscreteModel,
    ObservationModel,
    Trajectory,
    discretize,
    generate_observations,
    second_order_to_state_space,
    simulate_truth,
    spring_mass_default,
)
from .var3d import (
    GdConfig,
    TikhonovProblem,
    VarProblem,
    analytic_analysis,
    cost,
    grad,
    gradient_descent,
    run_cycled_3dvar,
    tikhonov_solve,
    to_tikhonov,
)

__version__ = "0.1.0"

__all__ = [
    "ContinuousSystem",
    "DiscreteModel",
    "ExperimentConfig",
    "GaussianState",
    "GdConfig",
    "NotPositiveDefiniteError",
    "ObservationModel",
    "RunResult",
    "SingularMatrixError",
    "TikhonovProblem",
    "Trajectory",
    "VarProblem",
    "analytic_analysis",
    "cholesky",
    "cost",
    "discretize",
    "enkf_update",
    "ensemble_covariance",
    "ensemble_mean",
    "forecast_ensemble",
    "generate_observations",
    "grad",
    "gradient_descent",
    "init_ensemble",
    "invert",
    "kalman_gain",
    "mat_mul",
    "open_loop_forecast",
    "perturb_observation",
    "predict",
    "rmse",
    "rng_stream",
    "run_cycled_3dvar",
    "run_enkf",
    "run_experiment",
    "run_kf",
    "sample_mvn",
    "second_order_to_state_space",
    "simulate_truth",
    "spring_mass_default",
    "tikhonov_solve",
    "to_tikhonov",
    "trace",
    "transpose",
    "update",
    "write_csv",
    "write_metrics",
]
