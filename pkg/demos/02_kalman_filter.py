"""Kalman filter on the spring-mass benchmark.

Starts from the wrong initial guess [0, 0] with covariance 0.05*I and
assimilates every position observation. Watch two things: the estimate
snapping onto the truth within a few steps, and the covariance trace
settling to its steady state.
"""

import numpy as np

from dassim import (
    discretize,
    generate_observations,
    kalman_gain,
    rmse,
    rng_stream,
    run_kf,
    simulate_truth,
    spring_mass_default,
    trace,
)

DT = 0.01
STEPS = 2000
SEED = 42

system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(r_var=0.01)
model = discretize(system, DT, Q)
truth = simulate_truth(model, truth_x0, STEPS, rng_stream([SEED, 0]))
observations = list(generate_observations(truth, obs, rng_stream([SEED, 1])))

analyses = run_kf(model, obs, observations, guess_x0, P0)

print("Kalman filter from the wrong guess [0, 0] (truth starts at [2, 0])")
print()
print("   t     kf_x1     truth_x1   |error|   trace(P)")
for k in (0, 1, 2, 5, 10, 50, 200, 500, 1000, 2000):
    estimate = analyses[k].mean[0]
    actual = truth.states[k][0]
    print(f"  {k * DT:5.2f}  {estimate:9.4f} {actual:9.4f}  {abs(estimate - actual):8.4f}  {trace(analyses[k].cov):9.6f}")

means = [s.mean for s in analyses]
half = range((STEPS + 1) // 2, STEPS + 1)
print()
print(f"x1 RMSE, second half of the run: {rmse(means, truth, 0, half):.4f}")
print(f"raw observation noise std:       {np.sqrt(obs.R[0, 0]):.4f}")

# the steady-state gain the filter converged to
steady_gain = kalman_gain(analyses[-1].cov, obs.H, obs.R)
print(f"steady-state gain: {steady_gain.ravel().round(4)}")
print("the position error drops an order of magnitude below the sensor noise;")
print("velocity is never observed but gets corrected through the covariance.")
