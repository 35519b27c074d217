"""
Fitness landscape around the true parameters
============================================

One-dimensional slices of the startup-current error.  Each parameter is
scaled by a factor while the others stay at their true values.
"""

import numpy as np

from imident import TRUE_PARAMS, IntegratorConfig, SupplyProfile, motor_fitness, simulate

supply = SupplyProfile(horizon=0.5)
cfg = IntegratorConfig()
reference = simulate(TRUE_PARAMS, supply, IntegratorConfig(rtol=1e-8, atol=1e-10))
theta0 = TRUE_PARAMS.as_array()

factors = np.array([0.5, 0.8, 0.9, 0.95, 0.99, 1.0, 1.01, 1.05, 1.1, 1.25, 2.0])
print("factor  " + "".join(f"{n:>10}" for n in ("Rs", "Rr", "Lleak", "Lm", "J")))
for fac in factors:
    row = []
    for d in range(5):
        theta = theta0.copy()
        theta[d] *= fac
        row.append(motor_fitness(theta, reference, supply, cfg))
    print(f"{fac:6.2f}  " + "".join(f"{v:10.4f}" for v in row))

# at 1.0 the error is only the gap between the two integrator tolerances
print("\nnoise floor:", motor_fitness(theta0, reference, supply, cfg))

# Rs and Rr trade off against each other; a 2-D scan shows the valley
print("\nRs x Rr scan (fitness):")
scales = np.linspace(0.8, 1.2, 5)
print("        " + "".join(f"Rr*{s:<7.2f}" for s in scales))
for a in scales:
    vals = []
    for b in scales:
        theta = theta0 * [a, b, 1, 1, 1]
        vals.append(motor_fitness(theta, reference, supply, cfg))
    print(f"Rs*{a:.2f} " + "".join(f"{v:10.4f}" for v in vals))
