"""Twin-experiment runner for the forced spring-mass benchmark.

One run simulates a noisy truth from [2, 0], observes its first component,
filters the observations with any subset of {kf, enkf, var3d} starting from
the wrong guess [0, 0], and scores everything against the truth. An
open-loop baseline (the model forecast with no assimilation at all) is
always included to ground the error comparisons.

Everything is deterministic given the seed: truth, observations, and the
ensemble filter each draw from an independent substream derived from
(seed, lane), so the method subset never changes the shared data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .enkf import run_enkf
from .kalman import run_kf
from .linalg import rng_stream
from .statespace import (
    DiscreteModel,
    Trajectory,
    discretize,
    generate_observations,
    simulate_truth,
    spring_mass_default,
)
from .var3d import GdConfig, run_cycled_3dvar

METHODS = ("kf", "enkf", "var3d")
SOLVERS = ("analytic", "gd")

# rng substream lanes per purpose; fixed so runs stay comparable
_LANE_TRUTH, _LANE_OBS, _LANE_ENKF = 0, 1, 2


def _fmt(value: float) -> str:
    """17 significant digits: enough for exact float64 round-trips."""
    return f"{value:.17g}"


@dataclass
class ExperimentConfig:
    """All knobs of one twin experiment (defaults match the benchmark)."""

    dt: float = 0.01
    steps: int = 2000
    seed: int = 42
    r_var: float = 0.01
    ensemble_size: int = 100
    d_scale: float = 0.05
    methods: tuple[str, ...] = METHODS
    solver: str = "analytic"
    gd_eps: float = 1e-6
    gd_step: float = 0.1
    gd_maxiter: int = 1000
    obs_stride: int = 1
    out_csv: str | None = None
    out_metrics: str | None = None

    def validate(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.r_var <= 0:
            raise ValueError(f"r-var must be positive, got {self.r_var}")
        if self.ensemble_size < 2:
            raise ValueError(f"ensemble-size must be >= 2, got {self.ensemble_size}")
        if self.d_scale <= 0:
            raise ValueError(f"d-scale must be positive, got {self.d_scale}")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.gd_eps <= 0 or self.gd_step <= 0 or self.gd_maxiter < 1:
            raise ValueError("gd-eps, gd-step and gd-maxiter must all be positive")
        if self.obs_stride < 1:
            raise ValueError(f"obs-stride must be >= 1, got {self.obs_stride}")


@dataclass
class RunResult:
    """Truth, observations, per-method analysis series, and scalar metrics."""

    config: ExperimentConfig
    truth: Trajectory
    observations: list[np.ndarray | None]
    series: dict[str, np.ndarray] = field(default_factory=dict)
    kf_p11: np.ndarray | None = None
    metrics: dict[str, float | int] = field(default_factory=dict)

    def __post_init__(self):
        for name, values in self.series.items():
            if len(values) != len(self.truth):
                raise ValueError(f"series {name!r} has {len(values)} entries, truth has {len(self.truth)}")


def rmse(estimates, truth: Trajectory, component: int, window: range) -> float:
    """Root-mean-square error of one state component over a step window."""
    if len(window) == 0:
        raise ValueError("window must be non-empty")
    if len(estimates) != len(truth):
        raise ValueError(f"estimates length {len(estimates)} does not match truth {len(truth)}")
    total = 0.0
    for k in window:
        err = estimates[k][component] - truth.states[k][component]
        total += err * err
    return math.sqrt(total / len(window))


def open_loop_forecast(model: DiscreteModel, x0: np.ndarray, steps: int) -> np.ndarray:
    """Noise-free model forecast: what you get with no assimilation at all."""
    states = np.empty((steps + 1, model.dim))
    states[0] = np.asarray(x0, dtype=float)
    for k in range(1, steps + 1):
        states[k] = model.Ad @ states[k - 1] + model.control((k - 1) * model.dt)
    return states


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run the configured twin experiment; fully deterministic given the seed."""
    cfg.validate()
    system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(cfg.r_var)
    model = discretize(system, cfg.dt, Q)

    truth = simulate_truth(model, truth_x0, cfg.steps, rng_stream([cfg.seed, _LANE_TRUTH]))
    z_all = generate_observations(truth, obs, rng_stream([cfg.seed, _LANE_OBS]))
    observations: list[np.ndarray | None] = [
        z_all[k] if k % cfg.obs_stride == 0 else None for k in range(len(truth))
    ]

    series: dict[str, np.ndarray] = {}
    kf_p11 = None
    if "kf" in cfg.methods:
        states = run_kf(model, obs, observations, guess_x0, P0)
        series["kf"] = np.array([s.mean for s in states])
        kf_p11 = np.array([s.cov[0, 0] for s in states])
    if "enkf" in cfg.methods:
        means, _ = run_enkf(
            model, obs, observations, guess_x0, P0, cfg.ensemble_size, rng_stream([cfg.seed, _LANE_ENKF])
        )
        series["enkf"] = means
    if "var3d" in cfg.methods:
        series["var3d"] = run_cycled_3dvar(
            model,
            obs,
            observations,
            guess_x0,
            cfg.d_scale * np.eye(2),
            solver=cfg.solver,
            cfg=GdConfig(step_size=cfg.gd_step, epsilon=cfg.gd_eps, n_max=cfg.gd_maxiter),
        )
    series["openloop"] = open_loop_forecast(model, guess_x0, cfg.steps)

    n = len(truth)
    full, second_half = range(n), range(n // 2, n)
    metrics: dict[str, float | int] = {"seed": cfg.seed, "dt": cfg.dt, "steps": cfg.steps}
    for name in (*[m for m in METHODS if m in cfg.methods], "openloop"):
        metrics[f"{name}_rmse_x1"] = rmse(series[name], truth, 0, full)
        metrics[f"{name}_rmse_x2"] = rmse(series[name], truth, 1, full)
        metrics[f"{name}_rmse_x1_secondhalf"] = rmse(series[name], truth, 0, second_half)
    return RunResult(
        config=cfg,
        truth=truth,
        observations=observations,
        series=series,
        kf_p11=kf_p11,
        metrics=metrics,
    )


def _csv_columns(result: RunResult) -> list[str]:
    columns = ["step", "t", "truth_x1", "truth_x2", "obs_z"]
    if "kf" in result.series:
        columns += ["kf_x1", "kf_x2", "kf_p11"]
    if "enkf" in result.series:
        columns += ["enkf_x1", "enkf_x2"]
    if "var3d" in result.series:
        columns += ["var3d_x1", "var3d_x2"]
    return columns


def write_csv(result: RunResult, path) -> None:
    """Write the per-step series as CSV (one row per step, plus a header).

    Missing values (observations at strided-out steps) become empty fields.
    """
    columns = _csv_columns(result)
    lines = [",".join(columns)]
    for k in range(len(result.truth)):
        z = result.observations[k]
        row = [
            str(k),
            _fmt(k * result.truth.dt),
            _fmt(result.truth.states[k][0]),
            _fmt(result.truth.states[k][1]),
            "" if z is None else _fmt(z[0]),
        ]
        if "kf" in result.series:
            row += [
                _fmt(result.series["kf"][k][0]),
                _fmt(result.series["kf"][k][1]),
                _fmt(result.kf_p11[k]),
            ]
        if "enkf" in result.series:
            row += [_fmt(result.series["enkf"][k][0]), _fmt(result.series["enkf"][k][1])]
        if "var3d" in result.series:
            row += [_fmt(result.series["var3d"][k][0]), _fmt(result.series["var3d"][k][1])]
        lines.append(",".join(row))
    try:
        with open(path, "w", encoding="ascii", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def write_metrics(result: RunResult, path) -> None:
    """Write the scalar metrics as one key=value per line."""
    lines = []
    for key, value in result.metrics.items():
        lines.append(f"{key}={value if isinstance(value, int) else _fmt(value)}")
    try:
        with open(path, "w", encoding="ascii", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc}") from exc
