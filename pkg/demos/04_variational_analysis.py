"""3D-Var three ways, then cycled along the trajectory.

A single analysis minimizes a quadratic cost balancing a background state
against one observation. The closed form, gradient descent on the cost,
and the ridge-regression (Tikhonov) reformulation all land on the same
state. Cycled along the benchmark with a fixed background covariance the
method tracks the truth, but trails the Kalman filter, whose covariance
adapts step by step.
"""

import numpy as np

from dassim import (
    GdConfig,
    TikhonovProblem,
    VarProblem,
    analytic_analysis,
    cost,
    discretize,
    generate_observations,
    grad,
    gradient_descent,
    rmse,
    rng_stream,
    run_cycled_3dvar,
    run_kf,
    simulate_truth,
    spring_mass_default,
    tikhonov_solve,
    to_tikhonov,
)

DT = 0.01
STEPS = 2000
SEED = 42

problem = VarProblem(
    background=np.array([0.0, 0.0]),
    background_cov=0.05 * np.eye(2),
    observation=np.array([2.0]),
    H=np.array([[1.0, 0.0]]),
    R=np.array([[0.01]]),
)

print("one analysis: background [0, 0] vs observation 2.0 of the position")
print(f"  cost at background      : {cost(problem, problem.background):9.4f}")
print(f"  gradient at background  : {grad(problem, problem.background).round(3)}")

closed_form, gain = analytic_analysis(problem)
descent, iterations, grad_norm = gradient_descent(
    problem, problem.background, GdConfig(step_size=0.1, epsilon=1e-10, n_max=10_000)
)
ridge = tikhonov_solve(to_tikhonov(problem))

print(f"  closed form             : {closed_form.round(8)}  gain {gain.ravel().round(4)}")
print(f"  gradient descent        : {descent.round(8)}  ({iterations} iterations, |grad| {grad_norm:.1e})")
print(f"  ridge reformulation     : {ridge.round(8)}  (mu = 1)")
print(f"  largest pairwise gap    : "
      f"{max(np.abs(closed_form - descent).max(), np.abs(closed_form - ridge).max()):.2e}")

print()
print("consistent sigma splits move scale into mu without moving the minimizer:")
for sigma_r in (0.2, 1.0, 5.0):
    t = to_tikhonov(problem, sigma_d=1.0, sigma_r=sigma_r)
    print(f"  sigma_r = {sigma_r:3.1f} -> mu = {t.mu:3.1f}, analysis {tikhonov_solve(t).round(6)}")

print()
print("overriding mu by hand sweeps the background/observation tradeoff:")
base = to_tikhonov(problem)
for mu in (0.1, 1.0, 3.0, 1e3):
    biased = TikhonovProblem(
        design=base.design, rhs=base.rhs, mu=mu,
        back_factor=base.back_factor, background=base.background,
    )
    print(f"  mu = {mu:6.1f} -> analysis {tikhonov_solve(biased).round(6)}")

print()
print("cycled along the benchmark (static background covariance 0.05*I):")
system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(r_var=0.01)
model = discretize(system, DT, Q)
truth = simulate_truth(model, truth_x0, STEPS, rng_stream([SEED, 0]))
observations = list(generate_observations(truth, obs, rng_stream([SEED, 1])))

cycled = run_cycled_3dvar(model, obs, observations, guess_x0, 0.05 * np.eye(2))
kalman = [s.mean for s in run_kf(model, obs, observations, guess_x0, P0)]

full = range(STEPS + 1)
print(f"  3D-Var x1 RMSE        : {rmse(cycled, truth, 0, full):.4f}")
print(f"  Kalman filter x1 RMSE : {rmse(kalman, truth, 0, full):.4f}")
print("with a diagonal static background covariance the analysis never")
print("corrects velocity directly (zero gain row), so position-only accuracy")
print("is what a fixed 0.05*I buys on this system.")
