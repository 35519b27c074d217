"""
Club membership dynamics
========================

Follows the clubs topology on a cheap test function and shows how leaders
shed memberships while laggards collect them, and how many different
particles take turns leading compared with the global-best swarm.
"""

import numpy as np

from imident import ClubConfig, Objective, PsoConfig, SearchSpace, pso_run


def rastrigin(x):
    return float(10 * len(x) + np.sum(x ** 2 - 10 * np.cos(2 * np.pi * x)))


space = SearchSpace(names=tuple("abcde"), lower=(-5.12,) * 5, upper=(5.12,) * 5)
clubs = ClubConfig()

sizes = []


def watch(state):
    sizes.append(state["registry"].sizes().copy())


rec = pso_run(Objective(rastrigin, 20_000), space, PsoConfig.clubs(), clubs, seed=0,
              observer=watch)
sizes = np.array(sizes)
print(f"C-PSO best {rec.fitness:.4g} after {rec.iterations} iterations")
print(f"membership range over the run: [{sizes.min()}, {sizes.max()}], "
      f"allowed [{clubs.min_membership}, {clubs.max_membership}]")
for it in (0, 10, 100, 500, len(sizes) - 1):
    s = sizes[it]
    print(f"  iteration {it + 1:4d}: mean {s.mean():5.2f}  min {s.min():2d}  max {s.max():2d}")

# leaders shed clubs, laggards collect them
final = sizes[-1]
print("\nmemberships at the end, in particle order:", final.tolist())

glob = pso_run(Objective(rastrigin, 20_000), space, PsoConfig.global_best(), seed=0)
print(f"\nPSO-g best {glob.fitness:.4g}")
print("distinct leaders  C-PSO:", len(set(rec.best_particle.tolist())),
      " PSO-g:", len(set(glob.best_particle.tolist())))
