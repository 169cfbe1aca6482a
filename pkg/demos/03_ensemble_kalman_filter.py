"""Ensemble Kalman filter: Monte Carlo members instead of a covariance.

Two parts. First, the sample-statistics gain converges to the exact filter
gain as the ensemble grows (about like 1/sqrt(m)). Second, a 100-member
run on the benchmark tracks the truth essentially as well as the exact
filter, without ever forming the true covariance recursion.
"""

import numpy as np

from dassim import (
    discretize,
    ensemble_covariance,
    generate_observations,
    init_ensemble,
    kalman_gain,
    rmse,
    rng_stream,
    run_enkf,
    simulate_truth,
    spring_mass_default,
)

DT = 0.01
STEPS = 2000
SEED = 42

system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(r_var=0.01)

print("part 1: ensemble gain vs exact gain")
prior_cov = np.array([[0.05, 0.02], [0.02, 0.04]])
exact = kalman_gain(prior_cov, obs.H, obs.R)
print(f"  exact gain      : {exact.ravel().round(4)}")
for m in (10, 100, 1_000, 10_000, 100_000):
    members = init_ensemble(np.array([2.0, 0.0]), prior_cov, m, rng_stream([SEED, m]))
    estimated = kalman_gain(ensemble_covariance(members), obs.H, obs.R)
    relative = np.linalg.norm(estimated - exact) / np.linalg.norm(exact)
    print(f"  m = {m:6d} gain : {estimated.ravel().round(4)}  (rel err {relative:.3f})")

print()
print("part 2: 100-member twin experiment")
model = discretize(system, DT, Q)
truth = simulate_truth(model, truth_x0, STEPS, rng_stream([SEED, 0]))
observations = list(generate_observations(truth, obs, rng_stream([SEED, 1])))

means, covs = run_enkf(model, obs, observations, guess_x0, P0, 100, rng_stream([SEED, 2]))

print("   t     enkf_x1   truth_x1   spread(x1)")
for k in (0, 10, 50, 200, 500, 1000, 2000):
    print(f"  {k * DT:5.2f}  {means[k][0]:9.4f} {truth.states[k][0]:9.4f}  {np.sqrt(covs[k][0, 0]):9.4f}")

half = range((STEPS + 1) // 2, STEPS + 1)
print()
print(f"x1 RMSE, second half: {rmse(means, truth, 0, half):.4f} "
      f"(observation noise std {np.sqrt(obs.R[0, 0]):.2f})")
print("every member gets its own perturbed copy of the observation; without")
print("that perturbation the ensemble spread would collapse below the true")
print("posterior uncertainty.")
