"""Induction motor V/F startup in the synchronous (dq) frame.

States are ``[i_sd, i_sq, psi_rd, psi_rq, omega]``: stator currents, rotor
flux linkages and mechanical rotor speed.  The supply voltage is aligned with
the d axis and both its amplitude and frequency ramp linearly from standstill
to rated values, after which they stay constant.
"""

import csv
import math
from dataclasses import dataclass, astuple
from pathlib import Path

import numba
import numpy as np

from .ode import IntegrationError, IvpProblem, integrate

__all__ = [
    "MotorParams",
    "MotorState",
    "SupplyProfile",
    "CurrentWaveform",
    "TRUE_PARAMS",
    "derivative",
    "park_inverse",
    "supply_phase",
    "simulate",
    "simulate_states",
    "SimulationError",
    "write_waveform_csv",
    "read_waveform_csv",
]

PARAM_NAMES = ("Rs", "Rr", "Lleak", "Lm", "J")


@dataclass(frozen=True)
class MotorParams:
    """The five identifiable quantities, SI units."""

    Rs: float
    Rr: float
    Lleak: float
    Lm: float
    J: float

    def __post_init__(self):
        values = astuple(self)
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise ValueError(f"motor parameters must be finite and positive, got {values}")

    def as_array(self):
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, theta):
        return cls(*(float(v) for v in np.asarray(theta, dtype=float).ravel()))


TRUE_PARAMS = MotorParams(Rs=9.203, Rr=6.61, Lleak=0.09718, Lm=1.6816, J=0.00077)


@dataclass
class MotorState:
    i_sd: float = 0.0
    i_sq: float = 0.0
    psi_rd: float = 0.0
    psi_rq: float = 0.0
    omega: float = 0.0

    def as_array(self):
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, y):
        return cls(*(float(v) for v in y))


@dataclass(frozen=True)
class SupplyProfile:
    """Constant V/F converter output.

    ``voltage`` is the rated line-neutral peak (V) and ``frequency`` the rated
    electrical angular frequency (rad/s).  ``boost`` is the voltage applied at
    t = 0; the amplitude ramps from ``boost`` to ``voltage`` while the frequency
    ramps from 0 to ``frequency`` over ``ramp_time``.
    """

    voltage: float = 220.0
    frequency: float = 2 * math.pi * 50.0
    ramp_time: float = 0.5
    horizon: float = 1.0
    pole_pairs: int = 2
    sample_period: float = 1e-3
    boost: float = 0.0

    def __post_init__(self):
        for name in ("voltage", "frequency", "ramp_time", "horizon", "sample_period"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        if not (self.ramp_time > 0 and self.horizon > 0 and self.sample_period > 0):
            raise ValueError("ramp_time, horizon and sample_period must be positive")
        if self.ramp_time > self.horizon:
            raise ValueError("ramp_time must not exceed horizon")
        if int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise ValueError("pole_pairs must be an integer >= 1")
        if self.boost < 0:
            raise ValueError("boost must be non-negative")

    def sample_times(self):
        n = int(round(self.horizon / self.sample_period))
        t = np.arange(n + 1) * self.sample_period
        t[-1] = min(t[-1], self.horizon)
        return t

    def synchronous_speed(self):
        """Rated synchronous mechanical speed (rad/s)."""
        return self.frequency / self.pole_pairs


@dataclass
class CurrentWaveform:
    """Sampled three-phase stator currents."""

    t: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.i1 = np.asarray(self.i1, dtype=float)
        self.i2 = np.asarray(self.i2, dtype=float)
        self.i3 = np.asarray(self.i3, dtype=float)
        n = self.t.shape[0]
        if not (self.i1.shape == self.i2.shape == self.i3.shape == (n,)):
            raise ValueError("waveform channels must have equal length")
        if n == 0 or self.t[0] != 0.0 or np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must start at 0 and increase strictly")

    @property
    def currents(self):
        return np.vstack([self.i1, self.i2, self.i3])

    def __len__(self):
        return self.t.shape[0]


class SimulationError(RuntimeError):
    """Simulation failed for a particular parameter vector."""

    def __init__(self, theta, cause):
        super().__init__(f"simulation failed for theta={list(np.round(theta, 9))}: {cause}")
        self.theta = np.asarray(theta)
        self.cause = cause


@numba.njit(cache=True)
def _supply(t, voltage, frequency, ramp_time, boost):
    k = t / ramp_time
    if k > 1.0:
        k = 1.0
    elif k < 0.0:
        k = 0.0
    return boost + (voltage - boost) * k, frequency * k


@numba.njit(cache=True)
def _rhs(y, t, rs, rr, lsl, lrl, lm, inertia, voltage, frequency, ramp_time, boost,
         pole_pairs, locked):
    i_sd, i_sq, psi_rd, psi_rq, omega = y[0], y[1], y[2], y[3], y[4]
    v_sd, w_s = _supply(t, voltage, frequency, ramp_time, boost)
    v_sq = 0.0

    ls = lsl + lm
    lr = lrl + lm
    sigma_ls = ls - lm * lm / lr
    tau_r = lr / rr
    w_e = pole_pairs * omega
    w_sl = w_s - w_e
    k_r = lm / lr
    # stator resistance plus rotor resistance referred through the coupling
    r_eq = rs + rr * k_r * k_r

    dy = np.empty(5)
    dy[0] = (v_sd - r_eq * i_sd + w_s * sigma_ls * i_sq
             + k_r / tau_r * psi_rd + k_r * w_e * psi_rq) / sigma_ls
    dy[1] = (v_sq - r_eq * i_sq - w_s * sigma_ls * i_sd
             + k_r / tau_r * psi_rq - k_r * w_e * psi_rd) / sigma_ls
    dy[2] = (lm * i_sd - psi_rd) / tau_r + w_sl * psi_rq
    dy[3] = (lm * i_sq - psi_rq) / tau_r - w_sl * psi_rd
    if locked:
        dy[4] = 0.0
    else:
        torque = 1.5 * pole_pairs * k_r * (psi_rd * i_sq - psi_rq * i_sd)
        dy[4] = torque / inertia
    return dy


def _rhs_args(params, supply, stator_leakage_fraction, locked):
    lsl = params.Lleak * stator_leakage_fraction
    lrl = params.Lleak - lsl
    return (
        float(params.Rs), float(params.Rr), float(lsl), float(lrl), float(params.Lm),
        float(params.J), float(supply.voltage), float(supply.frequency),
        float(supply.ramp_time), float(supply.boost), float(supply.pole_pairs),
        bool(locked),
    )


def derivative(state, t, params, supply, *, stator_leakage_fraction=0.5, locked=False):
    """Time derivative of the five motor states.

    ``state`` may be a :class:`MotorState` or a length-5 array; the result has
    the same type.
    """
    y = state.as_array() if isinstance(state, MotorState) else np.asarray(state, dtype=float)
    if not (np.all(np.isfinite(y)) and math.isfinite(t)):
        raise ValueError("state and time must be finite")
    dy = _rhs(y, float(t), *_rhs_args(params, supply, stator_leakage_fraction, locked))
    return MotorState.from_array(dy) if isinstance(state, MotorState) else dy


def park_inverse(i_sd, i_sq, theta_s):
    """Rotate dq currents into the three stationary phase currents."""
    out = []
    for shift in (0.0, -2 * np.pi / 3, -4 * np.pi / 3):
        th = np.asarray(theta_s) + shift
        out.append(np.asarray(i_sd) * np.cos(th) - np.asarray(i_sq) * np.sin(th))
    return tuple(out)


def supply_phase(t, supply):
    """Electrical angle of the supply, the exact integral of the frequency ramp."""
    t = np.asarray(t, dtype=float)
    ramp = supply.ramp_time
    w = supply.frequency
    return np.where(t <= ramp, 0.5 * w * t * t / ramp, 0.5 * w * ramp + w * (t - ramp))


def simulate_states(params, supply, integrator=None, *, t_eval=None,
                    stator_leakage_fraction=0.5, locked_rotor=False):
    """Integrate the state vector from rest; returns ``(t, states)``."""
    t = supply.sample_times() if t_eval is None else np.asarray(t_eval, dtype=float)
    problem = IvpProblem(
        _rhs, np.zeros(5), (0.0, supply.horizon), t,
        args=_rhs_args(params, supply, stator_leakage_fraction, locked_rotor),
    )
    try:
        y = integrate(problem, integrator)
    except IntegrationError as exc:
        raise SimulationError(params.as_array(), exc) from exc
    return t, y


def simulate(params, supply=None, integrator=None, *, t_eval=None,
             stator_leakage_fraction=0.5, locked_rotor=False):
    """Simulate a no-load V/F startup and return the phase currents.

    Parameters
    ----------
    params : MotorParams
    supply : SupplyProfile, optional
    integrator : IntegratorConfig, optional
    t_eval : array_like, optional
        Sample times; defaults to the supply's uniform grid on ``[0, horizon]``.
    stator_leakage_fraction : float
        Share of ``Lleak`` assigned to the stator side.
    locked_rotor : bool
        Pin the rotor speed at zero.

    Raises
    ------
    SimulationError
        Wraps any integrator failure together with the offending parameters.
    """
    supply = supply or SupplyProfile()
    t, y = simulate_states(params, supply, integrator, t_eval=t_eval,
                           stator_leakage_fraction=stator_leakage_fraction,
                           locked_rotor=locked_rotor)
    i1, i2, i3 = park_inverse(y[:, 0], y[:, 1], supply_phase(t, supply))
    return CurrentWaveform(t, i1, i2, i3)


def write_waveform_csv(waveform, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "i1", "i2", "i3"])
        for row in zip(waveform.t, waveform.i1, waveform.i2, waveform.i3):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_waveform_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["t", "i1", "i2", "i3"]:
            raise ValueError(f"{path}: expected header t,i1,i2,i3, got {header}")
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    return CurrentWaveform(data[:, 0], data[:, 1], data[:, 2], data[:, 3])
