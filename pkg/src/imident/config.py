"""Experiment configuration and its flat key/value file form.

The file is flat YAML (``key: value`` per line).  Recognized keys and units:

========================  ====================================================
``Rs Rr Lleak Lm J``      true motor parameters (ohm, ohm, H, H, kg m^2)
``voltage``               rated line-neutral peak voltage (V)
``frequency_hz``          rated supply frequency (Hz)
``ramp_time``             V/F ramp duration (s)
``horizon``               simulated startup length T (s)
``pole_pairs``            pole pairs (integer)
``sample_period``         current sampling period (s)
``boost``                 voltage at t = 0 (V)
``rtol atol``             candidate integrator tolerances
``max_step``              integrator step cap (s)
``initial_step``          first integrator step (s); omit for automatic
``max_steps``             integrator step limit per simulation
``reference_rtol``        reference waveform tolerances; set equal to ``rtol``
``reference_atol``        and ``atol`` for the zero-fitness self test
``noise_sigma``           std. dev. of Gaussian noise added to the reference (A)
``lower_<name>``          search lower bound per parameter
``upper_<name>``          initialization upper bound per parameter
``algorithms``            list drawn from cpso, psol, psog, ga, ls
``budget``                fitness evaluations per run
``runs``                  independent runs per algorithm
``base_seed``             run k uses seed base_seed + k
``workers``               parallel runs (ignored in deterministic mode)
``swarm_size``            PSO swarm size
``inertia``               PSO-g / PSO-l inertia weight
``cpso_inertia``          C-PSO inertia weight (multiplied by U(0,1))
``constriction``          velocity multiplier
``lrn1 lrn2``             personal / social learning rates
``velocity_scale``        initial velocity range as a fraction of the init width
``n_clubs``               number of clubs
``default_membership``    default membership level
``min_membership``        minimum membership level
``max_membership``        maximum membership level
``retention``             iterations between regressions to the default level
``ga_population``         GA population size
``ga_crossover_rate``     probability a mating pair is recombined
``ga_eta_c``              SBX distribution index
``ga_mutation_rate``      per-gene mutation probability
``ga_eta_m``              polynomial mutation distribution index
``ga_tournament_size``    survival tournament size
``ls_step_fraction``      line search step as a fraction of the init width
``ls_restart``            restart the line search until the budget is spent
========================  ====================================================
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .ga import GaConfig
from .line_search import LsConfig
from .motor import TRUE_PARAMS, MotorParams, SupplyProfile
from .objective import DEFAULT_SPACE, SearchSpace
from .ode import IntegratorConfig
from .pso import ClubConfig, PsoConfig

ALGORITHMS = ("cpso", "psol", "psog", "ga", "ls")
PARAM_NAMES = ("Rs", "Rr", "Lleak", "Lm", "J")


@dataclass
class ExperimentConfig:
    true_params: MotorParams = TRUE_PARAMS
    supply: SupplyProfile = field(default_factory=SupplyProfile)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    reference_integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(rtol=1e-8, atol=1e-10))
    space: SearchSpace = DEFAULT_SPACE
    algorithms: tuple = ALGORITHMS
    swarm_size: int = 20
    inertia: float = 0.729
    cpso_inertia: float = 1.458
    constriction: float = 1.0
    lrn1: float = 1.494
    lrn2: float = 1.494
    velocity_scale: float = 0.1
    clubs: ClubConfig = field(default_factory=ClubConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    ls: LsConfig = field(default_factory=LsConfig)
    budget: int = 100_000
    runs: int = 10
    base_seed: int = 0
    noise_sigma: float = 0.0
    workers: int = 1

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.budget < max(self.swarm_size, self.ga.population_size):
            raise ValueError("budget must cover at least one swarm/population evaluation")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    def pso_config(self, algo):
        common = dict(swarm_size=self.swarm_size, constriction=self.constriction,
                      lrn1=self.lrn1, lrn2=self.lrn2, velocity_scale=self.velocity_scale)
        if algo == "cpso":
            return PsoConfig.clubs(inertia=self.cpso_inertia, **common)
        if algo == "psol":
            return PsoConfig.ring(inertia=self.inertia, **common)
        if algo == "psog":
            return PsoConfig.global_best(inertia=self.inertia, **common)
        raise ValueError(f"{algo} is not a PSO variant")

    def to_flat(self):
        s, ig, ri = self.supply, self.integrator, self.reference_integrator
        c, g = self.clubs, self.ga
        flat = {name: float(getattr(self.true_params, name)) for name in PARAM_NAMES}
        flat.update(
            voltage=float(s.voltage), frequency_hz=s.frequency / (2 * math.pi),
            ramp_time=float(s.ramp_time), horizon=float(s.horizon),
            pole_pairs=int(s.pole_pairs), sample_period=float(s.sample_period),
            boost=float(s.boost),
            rtol=ig.rtol, atol=ig.atol, max_step=ig.max_step, max_steps=ig.max_steps,
            reference_rtol=ri.rtol, reference_atol=ri.atol,
            noise_sigma=float(self.noise_sigma),
        )
        if ig.initial_step is not None:
            flat["initial_step"] = ig.initial_step
        for name, lo, hi in zip(self.space.names, self.space.lower, self.space.upper):
            flat[f"lower_{name}"] = float(lo)
            flat[f"upper_{name}"] = float(hi)
        flat.update(
            algorithms=list(self.algorithms), budget=int(self.budget), runs=int(self.runs),
            base_seed=int(self.base_seed), workers=int(self.workers),
            swarm_size=int(self.swarm_size), inertia=self.inertia,
            cpso_inertia=self.cpso_inertia, constriction=self.constriction,
            lrn1=self.lrn1, lrn2=self.lrn2, velocity_scale=self.velocity_scale,
            n_clubs=c.n_clubs, default_membership=c.default,
            min_membership=c.min_membership, max_membership=c.max_membership,
            retention=c.retention,
            ga_population=g.population_size, ga_crossover_rate=g.crossover_rate,
            ga_eta_c=g.eta_c, ga_mutation_rate=g.mutation_rate, ga_eta_m=g.eta_m,
            ga_tournament_size=g.tournament_size,
            ls_step_fraction=self.ls.step_fraction, ls_restart=bool(self.ls.restart),
        )
        return flat

    @classmethod
    def from_flat(cls, flat):
        flat = dict(flat)
        base = cls()
        known = set(base.to_flat()) | {"initial_step"}
        unknown = set(flat) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

        def get(key, default):
            return flat.get(key, default)

        true = MotorParams(**{n: float(get(n, getattr(base.true_params, n))) for n in PARAM_NAMES})
        s0 = base.supply
        supply = SupplyProfile(
            voltage=float(get("voltage", s0.voltage)),
            frequency=2 * math.pi * float(get("frequency_hz", s0.frequency / (2 * math.pi))),
            ramp_time=float(get("ramp_time", s0.ramp_time)),
            horizon=float(get("horizon", s0.horizon)),
            pole_pairs=int(get("pole_pairs", s0.pole_pairs)),
            sample_period=float(get("sample_period", s0.sample_period)),
            boost=float(get("boost", s0.boost)),
        )
        i0 = base.integrator
        integrator = IntegratorConfig(
            rtol=float(get("rtol", i0.rtol)), atol=float(get("atol", i0.atol)),
            max_step=float(get("max_step", i0.max_step)),
            initial_step=None if get("initial_step", None) is None else float(flat["initial_step"]),
            max_steps=int(get("max_steps", i0.max_steps)),
        )
        r0 = base.reference_integrator
        reference_integrator = replace(
            integrator, rtol=float(get("reference_rtol", r0.rtol)),
            atol=float(get("reference_atol", r0.atol)))
        names = base.space.names
        space = SearchSpace(
            names=names,
            lower=tuple(float(get(f"lower_{n}", lo)) for n, lo in zip(names, base.space.lower)),
            upper=tuple(float(get(f"upper_{n}", hi)) for n, hi in zip(names, base.space.upper)),
        )
        c0, g0 = base.clubs, base.ga
        clubs = ClubConfig(
            n_clubs=int(get("n_clubs", c0.n_clubs)),
            default=int(get("default_membership", c0.default)),
            min_membership=int(get("min_membership", c0.min_membership)),
            max_membership=int(get("max_membership", c0.max_membership)),
            retention=int(get("retention", c0.retention)),
        )
        ga = GaConfig(
            population_size=int(get("ga_population", g0.population_size)),
            crossover_rate=float(get("ga_crossover_rate", g0.crossover_rate)),
            eta_c=float(get("ga_eta_c", g0.eta_c)),
            mutation_rate=float(get("ga_mutation_rate", g0.mutation_rate)),
            eta_m=float(get("ga_eta_m", g0.eta_m)),
            tournament_size=int(get("ga_tournament_size", g0.tournament_size)),
        )
        ls = LsConfig(step_fraction=float(get("ls_step_fraction", base.ls.step_fraction)),
                      restart=bool(get("ls_restart", base.ls.restart)))
        return cls(
            true_params=true, supply=supply, integrator=integrator,
            reference_integrator=reference_integrator, space=space,
            algorithms=tuple(get("algorithms", base.algorithms)),
            swarm_size=int(get("swarm_size", base.swarm_size)),
            inertia=float(get("inertia", base.inertia)),
            cpso_inertia=float(get("cpso_inertia", base.cpso_inertia)),
            constriction=float(get("constriction", base.constriction)),
            lrn1=float(get("lrn1", base.lrn1)), lrn2=float(get("lrn2", base.lrn2)),
            velocity_scale=float(get("velocity_scale", base.velocity_scale)),
            clubs=clubs, ga=ga, ls=ls,
            budget=int(get("budget", base.budget)), runs=int(get("runs", base.runs)),
            base_seed=int(get("base_seed", base.base_seed)),
            noise_sigma=float(get("noise_sigma", base.noise_sigma)),
            workers=int(get("workers", base.workers)),
        )


def load_config(path):
    with Path(path).open() as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a flat key/value mapping")
    return ExperimentConfig.from_flat(data)


def dump_config(config, path):
    path = Path(path)
    with path.open("w") as fh:
        yaml.safe_dump(config.to_flat(), fh, sort_keys=False)
    return path
