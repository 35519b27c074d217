"""Search space, bound handling, fitness and the shared evaluation budget."""

import logging
import sys
import threading
from dataclasses import dataclass

import numpy as np

from .motor import MotorParams, SimulationError, SupplyProfile, simulate
from .ode import IntegratorConfig

log = logging.getLogger(__name__)

__all__ = [
    "SearchSpace",
    "DEFAULT_SPACE",
    "FitnessValue",
    "Budget",
    "BudgetExhausted",
    "FAILED_FITNESS",
    "waveform_error",
    "evaluate",
    "motor_fitness",
    "clamp_lower",
    "sample_uniform",
    "Objective",
    "MotorObjective",
]

# fitness assigned to candidates whose simulation fails
FAILED_FITNESS = sys.float_info.max


@dataclass(frozen=True)
class SearchSpace:
    """Per-dimension lower bounds and upper *initialization* bounds.

    Only the lower bounds constrain the search; the upper bounds delimit
    where random starting points are drawn.
    """

    names: tuple = ("Rs", "Rr", "Lleak", "Lm", "J")
    lower: tuple = (1.0, 1.0, 0.002, 0.05, 0.00005)
    upper: tuple = (20.0, 20.0, 1.0, 5.0, 0.001)

    def __post_init__(self):
        if not len(self.names) == len(self.lower) == len(self.upper):
            raise ValueError("names, lower and upper must have equal length")
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower < upper required in every dimension")

    @property
    def dim(self):
        return len(self.names)

    @property
    def lo(self):
        return np.array(self.lower, dtype=float)

    @property
    def hi(self):
        return np.array(self.upper, dtype=float)

    @property
    def width(self):
        return self.hi - self.lo


DEFAULT_SPACE = SearchSpace()


def clamp_lower(theta, space):
    """Pin components below the lower bound; the upper bound is never enforced."""
    return np.maximum(np.asarray(theta, dtype=float), space.lo)


def sample_uniform(space, rng):
    return space.lo + rng.random(space.dim) * space.width


class BudgetExhausted(Exception):
    """Raised when an evaluation is requested after the budget is spent."""


class Budget:
    """Thread-safe evaluation counter."""

    def __init__(self, max_evals):
        if max_evals < 1:
            raise ValueError("budget must allow at least one evaluation")
        self.max_evals = int(max_evals)
        self._consumed = 0
        self._lock = threading.Lock()

    @property
    def consumed(self):
        return self._consumed

    @property
    def remaining(self):
        return self.max_evals - self._consumed

    @property
    def exhausted(self):
        return self._consumed >= self.max_evals

    def charge(self):
        """Claim one evaluation and return its 1-based index."""
        with self._lock:
            if self._consumed >= self.max_evals:
                raise BudgetExhausted(f"budget of {self.max_evals} evaluations exhausted")
            self._consumed += 1
            return self._consumed

    def __repr__(self):
        return f"Budget({self._consumed}/{self.max_evals})"


@dataclass(frozen=True)
class FitnessValue:
    value: float
    index: int

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("fitness must be non-negative")

    def __float__(self):
        return float(self.value)


def waveform_error(reference, candidate):
    """Trapezoidal integral of the summed absolute phase-current error."""
    err = np.abs(reference.currents - candidate.currents).sum(axis=0)
    return float(np.trapezoid(err, reference.t))


def motor_fitness(theta, reference, supply, integrator):
    """Fitness of ``theta`` without budget accounting.

    A failed simulation yields :data:`FAILED_FITNESS` rather than an error so
    that optimizers survive pathological candidates.
    """
    try:
        candidate = simulate(MotorParams.from_array(theta), supply, integrator,
                             t_eval=reference.t)
    except (SimulationError, ValueError) as exc:
        log.warning("%s", exc)
        return FAILED_FITNESS
    value = waveform_error(reference, candidate)
    if not np.isfinite(value):
        log.warning("non-finite error for theta=%s", theta)
        return FAILED_FITNESS
    return value


def evaluate(theta, reference, supply, integrator, budget):
    """Charge one evaluation of ``budget`` and return the fitness of ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(theta > 0):
        raise ValueError(f"theta must be strictly positive, got {theta}")
    index = budget.charge()
    return FitnessValue(motor_fitness(theta, reference, supply, integrator), index)


class Objective:
    """Budgeted wrapper around a scalar function of a parameter vector.

    Every call charges the budget and is appended to :attr:`history`, which
    makes the best-so-far trace available to every optimizer in the same form.
    Optimizers stop on :class:`BudgetExhausted`.
    """

    def __init__(self, func, budget):
        self.func = func
        self.budget = budget if isinstance(budget, Budget) else Budget(budget)
        self.history = []
        self._best = np.inf
        self._best_x = None
        self._lock = threading.Lock()

    def _compute(self, theta):
        return float(self.func(theta))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        self.budget.charge()
        value = self._compute(theta)
        with self._lock:
            self.history.append(value)
            if value < self._best:
                self._best = value
                self._best_x = theta.copy()
        return value

    @property
    def evaluations(self):
        return len(self.history)

    @property
    def best(self):
        return self._best

    @property
    def best_x(self):
        return self._best_x

    def trace(self):
        """Best-so-far fitness after each evaluation."""
        if not self.history:
            return np.empty(0)
        return np.minimum.accumulate(np.asarray(self.history, dtype=float))


class MotorObjective(Objective):
    """Startup-current fitness against a reference waveform."""

    def __init__(self, reference, supply=None, integrator=None, budget=100_000):
        super().__init__(None, budget)
        self.reference = reference
        self.supply = supply or SupplyProfile()
        self.integrator = integrator or IntegratorConfig()

    def _compute(self, theta):
        return motor_fitness(theta, self.reference, self.supply, self.integrator)
