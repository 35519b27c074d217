"""Induction motor parameter identification from V/F startup currents.

Five optimizers share one budgeted fitness: a club-based particle swarm,
global and ring particle swarms, a real-coded genetic algorithm and a greedy
line search.
"""

from .config import ExperimentConfig, load_config
from .ga import GaConfig, ga_run
from .harness import run_experiment, summarize
from .line_search import LsConfig, ls_run
from .motor import (
    TRUE_PARAMS,
    CurrentWaveform,
    MotorParams,
    MotorState,
    SupplyProfile,
    park_inverse,
    read_waveform_csv,
    simulate,
    simulate_states,
    write_waveform_csv,
)
from .objective import (
    DEFAULT_SPACE,
    Budget,
    BudgetExhausted,
    MotorObjective,
    Objective,
    SearchSpace,
    clamp_lower,
    evaluate,
    motor_fitness,
    sample_uniform,
)
from .ode import IntegratorConfig, IvpProblem, integrate
from .pso import ClubConfig, ClubRegistry, PsoConfig, pso_run
from .records import RunRecord

__all__ = [
    "Budget",
    "BudgetExhausted",
    "ClubConfig",
    "ClubRegistry",
    "CurrentWaveform",
    "ExperimentConfig",
    "GaConfig",
    "IntegratorConfig",
    "IvpProblem",
    "LsConfig",
    "MotorObjective",
    "MotorParams",
    "MotorState",
    "Objective",
    "PsoConfig",
    "RunRecord",
    "SearchSpace",
    "SupplyProfile",
    "DEFAULT_SPACE",
    "TRUE_PARAMS",
    "clamp_lower",
    "evaluate",
    "ga_run",
    "integrate",
    "load_config",
    "ls_run",
    "motor_fitness",
    "park_inverse",
    "pso_run",
    "read_waveform_csv",
    "run_experiment",
    "sample_uniform",
    "simulate",
    "simulate_states",
    "summarize",
    "write_waveform_csv",
]

__version__ = "0.1.0"
