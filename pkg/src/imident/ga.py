"""Real-coded genetic algorithm: SBX crossover, polynomial mutation,
tournament survival over parents plus offspring, and single-elite retention.
"""

import time
from dataclasses import dataclass

import numpy as np

from .objective import BudgetExhausted, clamp_lower
from .records import record_from_objective

__all__ = [
    "GaConfig",
    "Individual",
    "sbx_crossover",
    "polynomial_mutation",
    "tournament",
    "survival_selection",
    "ga_run",
]


@dataclass
class GaConfig:
    population_size: int = 50
    crossover_rate: float = 0.5
    eta_c: float = 15.0
    mutation_rate: float = 0.01
    eta_m: float = 15.0
    tournament_size: int = 2
    # per-gene probability of recombining inside a crossed pair
    gene_swap_rate: float = 0.5

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population_size must be an even number >= 2")
        for name in ("crossover_rate", "mutation_rate", "gene_swap_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not (self.eta_c > 0 and self.eta_m > 0):
            raise ValueError("distribution indices must be positive")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")


@dataclass
class Individual:
    chromosome: np.ndarray
    fitness: float = np.inf


def sbx_beta(u, eta_c):
    u = np.asarray(u, dtype=float)
    e = 1.0 / (eta_c + 1.0)
    with np.errstate(divide="ignore"):
        return np.where(u <= 0.5, (2.0 * u) ** e, (1.0 / (2.0 * (1.0 - u))) ** e)


def sbx_crossover(parent1, parent2, eta_c, rng, space=None, gene_swap_rate=0.5,
                  return_unclamped=False):
    """Simulated binary crossover of two parents.

    Each gene is recombined with probability ``gene_swap_rate``; the spread
    factor is drawn per recombined gene.  Children are clamped to the lower
    bounds of ``space`` when given.  With ``return_unclamped`` the pre-clamp
    children are returned as a second pair.
    """
    p1 = np.asarray(parent1, dtype=float)
    p2 = np.asarray(parent2, dtype=float)
    d = p1.shape[0]
    cross = rng.random(d) < gene_swap_rate
    u = rng.random(d)
    beta = np.where(cross, sbx_beta(u, eta_c), 1.0)
    # same children as 0.5[(1 +- beta) p1 + (1 -+ beta) p2], exact when p1 == p2
    mean = 0.5 * (p1 + p2)
    spread = 0.5 * beta * (p1 - p2)
    c1, c2 = mean + spread, mean - spread
    raw = (c1.copy(), c2.copy())
    if space is not None:
        c1, c2 = clamp_lower(c1, space), clamp_lower(c2, space)
    return ((c1, c2), raw) if return_unclamped else (c1, c2)


def polynomial_mutation(x, eta_m, rate, space, rng):
    """Polynomial mutation, unbounded-index form followed by the lower clamp."""
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    hit = rng.random(d) < rate
    u = rng.random(d)
    e = 1.0 / (eta_m + 1.0)
    delta = np.where(u < 0.5, (2.0 * u) ** e - 1.0, 1.0 - (2.0 * (1.0 - u)) ** e)
    return clamp_lower(np.where(hit, x + delta * space.width, x), space)


def tournament(fitness, size, rng):
    """Index of the winner of one tournament drawn with replacement; first drawn wins ties."""
    picks = rng.integers(len(fitness), size=size)
    best = picks[0]
    for k in picks[1:]:
        if fitness[k] < fitness[best]:
            best = k
    return int(best)


def survival_selection(pool_x, pool_f, config, rng):
    """Pick the next population from the pooled candidates.

    Returns the chosen pool indices: ``population_size`` tournaments, then the
    pool's best overwrites a random slot unless a tournament already kept it.
    """
    pool_f = np.asarray(pool_f, dtype=float)
    chosen = np.array([tournament(pool_f, config.tournament_size, rng)
                       for _ in range(config.population_size)])
    elite = int(np.argmin(pool_f))
    slot = int(rng.integers(config.population_size))
    if elite not in chosen:
        chosen[slot] = elite
    return chosen


def ga_run(objective, space, config=None, seed=None, *, observer=None, algo="ga"):
    """Minimize ``objective`` until its budget is exhausted.

    Random draws come from ``default_rng(seed)`` in this order: the initial
    population, then per generation the mating permutation, per pair the
    crossover gate and SBX draws, per child the mutation draws, and finally
    the survival tournaments and the elite slot.
    """
    config = config or GaConfig()
    t_start = time.perf_counter()
    rng = np.random.default_rng(seed)
    n, d = config.population_size, space.dim

    pop = space.lo + rng.random((n, d)) * space.width
    fit = np.full(n, np.inf)
    generations = 0
    try:
        for i in range(n):
            fit[i] = objective(pop[i])
        while True:
            order = rng.permutation(n)
            children = np.empty((n, d))
            for k in range(0, n, 2):
                a, b = pop[order[k]], pop[order[k + 1]]
                if rng.random() < config.crossover_rate:
                    a, b = sbx_crossover(a, b, config.eta_c, rng, space, config.gene_swap_rate)
                children[k], children[k + 1] = a, b
            for k in range(n):
                children[k] = polynomial_mutation(children[k], config.eta_m,
                                                  config.mutation_rate, space, rng)
            child_fit = np.full(n, np.inf)
            try:
                for k in range(n):
                    child_fit[k] = objective(children[k])
            except BudgetExhausted:
                # survivors of a partially evaluated brood are still selected
                keep = np.isfinite(child_fit)
                children, child_fit = children[keep], child_fit[keep]
                if child_fit.size:
                    pop, fit = _next_generation(pop, fit, children, child_fit, config, rng)
                    generations += 1
                raise
            pop, fit = _next_generation(pop, fit, children, child_fit, config, rng)
            generations += 1
            if observer is not None:
                observer({"generation": generations, "population": pop, "fitness": fit})
    except BudgetExhausted:
        pass

    return record_from_objective(algo, seed, objective, iterations=generations,
                                 wall_time=time.perf_counter() - t_start)


def _next_generation(pop, fit, children, child_fit, config, rng):
    pool_x = np.vstack([pop, children])
    pool_f = np.concatenate([fit, child_fit])
    chosen = survival_selection(pool_x, pool_f, config, rng)
    return pool_x[chosen].copy(), pool_f[chosen].copy()
