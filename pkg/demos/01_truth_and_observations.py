"""Simulate the benchmark truth and observe it.

The system is a damped spring-mass driven by 3*cos(2t): position starts at
2, velocity at 0. Forward Euler at dt=0.01 plus a small per-step process
noise gives the "truth" a twin experiment tries to recover; a noisy sensor
sees only the position.
"""

import numpy as np

from dassim import (
    discretize,
    generate_observations,
    rng_stream,
    simulate_truth,
    spring_mass_default,
)

DT = 0.01
STEPS = 2000
SEED = 42

system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(r_var=0.01)
model = discretize(system, DT, Q)

truth = simulate_truth(model, truth_x0, STEPS, rng_stream([SEED, 0]))
observations = generate_observations(truth, obs, rng_stream([SEED, 1]))

print("forced spring-mass truth, dt=0.01, t in [0, 20]")
print(f"  transition:\n{model.Ad}")
print(f"  process noise Q = {Q[0, 0]} * I, sensor noise R = {obs.R[0, 0]}")
print()
print("   t     position  velocity  observed")
for k in range(0, STEPS + 1, 250):
    x1, x2 = truth.states[k]
    print(f"  {truth.times[k]:5.2f}  {x1:9.4f} {x2:9.4f} {observations[k, 0]:9.4f}")

sensor_error = observations[:, 0] - truth.states[:, 0]
print()
print(f"raw sensor error: mean {sensor_error.mean():+.4f}, std {sensor_error.std():.4f} "
      f"(noise std is {np.sqrt(obs.R[0, 0]):.2f})")
print("the damped transient from [2, 0] settles onto the forced periodic orbit;")
print("any filter has to beat that 0.1 sensor noise to be worth running.")
