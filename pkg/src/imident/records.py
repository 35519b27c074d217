"""Result container shared by all optimizers."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunRecord:
    """Outcome of one optimizer run.

    ``best`` holds the best-so-far fitness after every evaluation (so
    ``best[k]`` belongs to evaluation ``k + 1``).  ``best_particle`` is the
    per-iteration index of the swarm's best particle and stays ``None`` for
    non-swarm optimizers.
    """

    algo: str
    seed: int | None
    best: np.ndarray
    theta: np.ndarray | None
    fitness: float
    budget: int
    best_particle: np.ndarray | None = None
    iterations: int = 0
    wall_time: float = 0.0
    converged_early: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def evaluations(self):
        return int(self.best.shape[0])

    @property
    def evals(self):
        return np.arange(1, self.evaluations + 1)

    def padded_trace(self):
        """Best-so-far over the whole budget, flat after the last evaluation."""
        out = np.empty(self.budget)
        n = min(self.evaluations, self.budget)
        out[:n] = self.best[:n]
        out[n:] = self.best[n - 1] if n else np.nan
        return out

    def evals_to_fraction(self, fraction=0.05):
        """Evaluations needed to reach ``fraction`` of the initial fitness, or None."""
        if not self.evaluations:
            return None
        target = fraction * self.best[0]
        hit = np.flatnonzero(self.best <= target)
        return int(hit[0]) + 1 if hit.size else None


def record_from_objective(algo, seed, objective, **kw):
    return RunRecord(
        algo=algo,
        seed=seed,
        best=objective.trace(),
        theta=None if objective.best_x is None else objective.best_x.copy(),
        fitness=float(objective.best),
        budget=objective.budget.max_evals,
        **kw,
    )
