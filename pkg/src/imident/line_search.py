"""Greedy coordinate descent on a fixed grid.

From a random grid point, all 2n axis neighbors are evaluated and the search
moves to the best of them as long as it is no worse than the current point.
It stops at the first sweep where every neighbor is strictly worse.
"""

import time
from dataclasses import dataclass

import numpy as np

from .objective import BudgetExhausted, clamp_lower
from .records import record_from_objective

__all__ = ["LsConfig", "neighbors", "ls_run"]


@dataclass
class LsConfig:
    step_fraction: float = 0.001
    restart: bool = False
    # accepted points remembered to stop two-cycles on plateaus
    memory: int = 2

    def __post_init__(self):
        if not self.step_fraction > 0:
            raise ValueError("step_fraction must be positive")

    def steps(self, space):
        return self.step_fraction * space.width


def neighbors(x, delta, space=None):
    """The ``2n`` axis neighbors of ``x``: ``x - delta_i e_i`` then ``x + delta_i e_i`` per axis."""
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    out = []
    for i in range(x.shape[0]):
        for sign in (-1.0, 1.0):
            y = x.copy()
            y[i] += sign * delta[i]
            out.append(y if space is None else clamp_lower(y, space))
    return np.array(out)


def _snap(x, delta, space):
    return space.lo + np.round((x - space.lo) / delta) * delta


def ls_run(objective, space, config=None, seed=None, *, algo="ls"):
    """Run greedy descent; the budget is only exhausted in restart mode."""
    config = config or LsConfig()
    t_start = time.perf_counter()
    rng = np.random.default_rng(seed)
    delta = config.steps(space)
    sweeps = 0
    converged = False
    try:
        while True:
            x = _snap(space.lo + rng.random(space.dim) * space.width, delta, space)
            fx = objective(x)
            recent = [x.copy()]
            while True:
                cand = neighbors(x, delta, space)
                cand_f = np.array([objective(c) for c in cand])
                sweeps += 1
                # ignore the current point and recently accepted ones
                stale = np.array([any(np.array_equal(c, r) for r in recent) for c in cand])
                cand_f = np.where(stale, np.inf, cand_f)
                k = int(np.argmin(cand_f))
                if cand_f[k] > fx:
                    break
                x, fx = cand[k], cand_f[k]
                recent = (recent + [x.copy()])[-(config.memory + 1):]
            converged = True
            if not config.restart:
                break
    except BudgetExhausted:
        pass

    return record_from_objective(algo, seed, objective, iterations=sweeps,
                                 converged_early=converged and not objective.budget.exhausted,
                                 wall_time=time.perf_counter() - t_start)
