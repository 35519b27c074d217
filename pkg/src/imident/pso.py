"""Particle swarm optimizer with global, ring and club-based topologies.

In the club topology every particle belongs to a set of clubs and its
neighborhood is everybody it shares at least one club with.  Particles that
are the best of their neighborhood leave a club, the worst join one, and the
rest drift back toward the default membership level every ``retention``
iterations.

Random streams
--------------
``SeedSequence(seed).spawn(2)`` gives two generators.  The first (swarm)
draws, in order: initial positions ``(N, d)``, initial velocities ``(N, d)``,
then per iteration and per particle ``r1, r2`` (plus ``r3`` with randomized
inertia), each of length ``d``.  The second (clubs) draws the initial
memberships, then the leave/join choices.  Keeping them apart means the
topology never perturbs the swarm stream.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .objective import BudgetExhausted, clamp_lower
from .records import record_from_objective

__all__ = [
    "PsoConfig",
    "ClubConfig",
    "ClubRegistry",
    "velocity_update",
    "position_update",
    "neighborhood_matrix",
    "neighborhood_best",
    "membership_update",
    "pso_run",
    "swarm_streams",
]

TOPOLOGIES = ("global", "ring", "clubs")


@dataclass
class PsoConfig:
    swarm_size: int = 20
    inertia: float = 0.729
    constriction: float = 1.0
    lrn1: float = 1.494
    lrn2: float = 1.494
    topology: str = "global"
    randomized_inertia: bool = False
    # initial velocity range as a fraction of the initialization width
    velocity_scale: float = 0.1

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        for name in ("inertia", "constriction", "lrn1", "lrn2", "velocity_scale"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def global_best(cls, **kw):
        return cls(**{"topology": "global", **kw})

    @classmethod
    def ring(cls, **kw):
        return cls(**{"topology": "ring", **kw})

    @classmethod
    def clubs(cls, **kw):
        # doubled inertia times U(0,1) has the same mean as the static 0.729
        return cls(**{"topology": "clubs", "inertia": 1.458, "randomized_inertia": True, **kw})


@dataclass
class ClubConfig:
    n_clubs: int = 100
    default: int = 10
    min_membership: int = 4
    max_membership: int = 33
    retention: int = 10
    dynamic: bool = True

    def __post_init__(self):
        if not 0 <= self.min_membership <= self.default <= self.max_membership <= self.n_clubs:
            raise ValueError("need 0 <= min <= default <= max <= n_clubs")
        if self.retention < 1:
            raise ValueError("retention must be >= 1")


@dataclass
class ClubRegistry:
    """Per-particle club memberships.

    ``memberships[j]`` is the sorted list of club ids particle ``j`` belongs
    to.  Every leave/join is appended to ``events`` as
    ``(iteration, particle, action, club, rule)``.
    """

    memberships: list
    config: ClubConfig = field(default_factory=ClubConfig)
    events: list = field(default_factory=list)

    @classmethod
    def random(cls, n_particles, config, rng):
        memberships = [
            sorted(int(c) for c in rng.choice(config.n_clubs, config.default, replace=False))
            for _ in range(n_particles)
        ]
        return cls(memberships, config)

    @classmethod
    def single_club(cls, n_particles, config=None):
        """Everybody in club 0; with ``dynamic=False`` this is the global topology."""
        config = config or ClubConfig(n_clubs=1, default=1, min_membership=1,
                                      max_membership=1, dynamic=False)
        return cls([[0] for _ in range(n_particles)], config)

    @property
    def n_particles(self):
        return len(self.memberships)

    def sizes(self):
        return np.array([len(m) for m in self.memberships])

    def matrix(self):
        m = np.zeros((self.n_particles, self.config.n_clubs), dtype=bool)
        for j, clubs in enumerate(self.memberships):
            m[j, clubs] = True
        return m

    def members(self, club):
        return [j for j, clubs in enumerate(self.memberships) if club in clubs]

    def leave(self, j, rng, iteration=0, rule=""):
        clubs = self.memberships[j]
        club = clubs[int(rng.integers(len(clubs)))]
        clubs.remove(club)
        self.events.append((iteration, j, "leave", club, rule))
        return club

    def join(self, j, rng, iteration=0, rule=""):
        clubs = self.memberships[j]
        free = [c for c in range(self.config.n_clubs) if c not in clubs]
        club = free[int(rng.integers(len(free)))]
        clubs.append(club)
        clubs.sort()
        self.events.append((iteration, j, "join", club, rule))
        return club


def swarm_streams(seed):
    swarm, clubs = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(swarm), np.random.default_rng(clubs)


def velocity_update(x, v, p, g, config, rng):
    """New velocity of one particle (no clamping)."""
    d = x.shape[0]
    if config.randomized_inertia:
        r1 = rng.random(d)
        r2 = rng.random(d)
        r3 = rng.random(d)
        new = (config.inertia * r1 * v + config.lrn1 * r2 * (p - x)
               + config.lrn2 * r3 * (g - x))
    else:
        r1 = rng.random(d)
        r2 = rng.random(d)
        new = config.inertia * v + config.lrn1 * r1 * (p - x) + config.lrn2 * r2 * (g - x)
    return config.constriction * new


def position_update(x, v, space):
    return clamp_lower(x + v, space)


def neighborhood_matrix(topology, n, registry=None):
    """Boolean ``(n, n)`` matrix; row ``i`` marks particle ``i``'s neighbors (itself included)."""
    if topology == "global":
        return np.ones((n, n), dtype=bool)
    if topology == "ring":
        nb = np.eye(n, dtype=bool)
        idx = np.arange(n)
        nb[idx, (idx - 1) % n] = True
        nb[idx, (idx + 1) % n] = True
        return nb
    if topology == "clubs":
        m = registry.matrix().astype(np.int64)
        nb = (m @ m.T) > 0
        np.fill_diagonal(nb, True)
        return nb
    raise ValueError(f"unknown topology {topology!r}")


def neighborhood_best(i, pbest_f, neighbors):
    """Index of the best personal best in ``i``'s neighborhood (lowest index on ties)."""
    return int(np.argmin(np.where(neighbors[i], pbest_f, np.inf)))


def neighborhood_worst(i, pbest_f, neighbors):
    return int(np.argmax(np.where(neighbors[i], pbest_f, -np.inf)))


def membership_update(registry, pbest_f, iteration, rng):
    """Apply one round of leave/join/regression rules in particle order.

    Extremes are judged against the neighborhoods at entry, before any
    membership changes this round.
    """
    cfg = registry.config
    neighbors = neighborhood_matrix("clubs", registry.n_particles, registry)
    for j in range(registry.n_particles):
        fired = False
        size = len(registry.memberships[j])
        if neighborhood_best(j, pbest_f, neighbors) == j and size > cfg.min_membership:
            registry.leave(j, rng, iteration, "best")
            fired = True
        size = len(registry.memberships[j])
        if neighborhood_worst(j, pbest_f, neighbors) == j and size < cfg.max_membership:
            registry.join(j, rng, iteration, "worst")
            fired = True
        size = len(registry.memberships[j])
        if not fired and size != cfg.default and iteration % cfg.retention == 0:
            if size > cfg.default:
                registry.leave(j, rng, iteration, "regress")
            else:
                registry.join(j, rng, iteration, "regress")
    return registry


def pso_run(objective, space, config=None, clubs=None, seed=None, *, registry=None,
            observer=None, algo=None):
    """Minimize ``objective`` until its budget is exhausted.

    Parameters
    ----------
    objective : Objective
        Budgeted fitness; raising :class:`BudgetExhausted` ends the run.
    space : SearchSpace
    config : PsoConfig
    clubs : ClubConfig, optional
        Club parameters for the ``clubs`` topology.
    seed : int
    registry : ClubRegistry, optional
        Pre-built memberships; skips the random initial assignment.
    observer : callable, optional
        Called as ``observer(state)`` after every completed iteration with a
        dict holding ``iteration``, ``x``, ``v``, ``pbest_x``, ``pbest_f`` and
        ``registry``.

    Returns
    -------
    RunRecord
    """
    config = config or PsoConfig()
    t_start = time.perf_counter()
    rng, club_rng = swarm_streams(seed)
    n, d = config.swarm_size, space.dim

    x = space.lo + rng.random((n, d)) * space.width
    v = (2.0 * rng.random((n, d)) - 1.0) * space.width * config.velocity_scale
    pbest_x = x.copy()
    pbest_f = np.full(n, np.inf)

    if config.topology == "clubs" and registry is None:
        registry = ClubRegistry.random(n, clubs or ClubConfig(), club_rng)
    if config.topology == "clubs" and registry.n_particles != n:
        raise ValueError("registry size does not match swarm size")

    best_particle = []
    iteration = 0
    evaluated = 0
    try:
        while True:
            iteration += 1
            for i in range(n):
                evaluated = i  # evaluations completed so far this iteration
                f = objective(x[i])
                if f < pbest_f[i]:
                    pbest_f[i] = f
                    pbest_x[i] = x[i]
            evaluated = 0
            best_particle.append(int(np.argmin(pbest_f)))

            neighbors = neighborhood_matrix(config.topology, n, registry)
            for i in range(n):
                g = pbest_x[neighborhood_best(i, pbest_f, neighbors)]
                v[i] = velocity_update(x[i], v[i], pbest_x[i], g, config, rng)
                x[i] = position_update(x[i], v[i], space)

            if config.topology == "clubs" and registry.config.dynamic:
                membership_update(registry, pbest_f, iteration, club_rng)
            if observer is not None:
                observer({"iteration": iteration, "x": x, "v": v, "pbest_x": pbest_x,
                          "pbest_f": pbest_f, "registry": registry})
    except BudgetExhausted:
        # a partially evaluated final iteration still counts
        if evaluated > 0:
            best_particle.append(int(np.argmin(pbest_f)))
        iteration = len(best_particle)

    tag = algo or {"global": "psog", "ring": "psol", "clubs": "cpso"}[config.topology]
    return record_from_objective(
        tag, seed, objective,
        best_particle=np.asarray(best_particle, dtype=np.int64),
        iterations=iteration,
        wall_time=time.perf_counter() - t_start,
    )
