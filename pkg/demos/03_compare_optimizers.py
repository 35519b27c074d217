"""
Five optimizers on the identification problem
=============================================

A scaled-down comparison: short startup, small budget, three seeds.  The
full protocol is ``identify run --algo all`` with the default config.
"""

from dataclasses import replace

import numpy as np

from imident import ExperimentConfig, SupplyProfile, run_experiment

config = ExperimentConfig(supply=SupplyProfile(horizon=0.5), budget=3000, runs=3)
result = run_experiment(config)

print(f"{'algo':<6}{'median':>12}{'min':>12}{'max':>12}   mean % deviation (Rs Rr Lleak Lm J)")
for s in result.stats.values():
    dev = " ".join(f"{d:7.2f}" for d in s.deviation)
    print(f"{s.algo:<6}{s.median:12.5g}{s.min:12.5g}{s.max:12.5g}   {dev}")

# evaluations each run needed to get within 5% of its starting fitness
print("\nevaluations to 5% of the initial fitness:")
for s in result.stats.values():
    print(f"  {s.algo:<6} {s.evals_to_5pct}")

# the line search stops at a grid minimum, possibly before the budget runs out
ls = [r for r in result.records if r.algo == "ls"]
print("\nline search evaluations used:", [r.evaluations for r in ls])

# with noisy measurements nobody reaches the noise-free floor
noisy = run_experiment(replace(config, noise_sigma=0.05, algorithms=("cpso",), runs=1))
print("\nC-PSO with 0.05 A measurement noise:", noisy.stats["cpso"].median)
print("theta:", np.round(noisy.records[0].theta, 5))
