"""Explicit Dormand-Prince 5(4) integrator sampled on a fixed output grid.

The stepping kernel is written once in plain loops so that it runs both as
ordinary Python (any callable right-hand side) and compiled with numba (when
the right-hand side is itself an ``@numba.njit`` function).  The motor model
relies on the compiled path; thousands of simulations per optimizer run are
otherwise too slow.

The kernel reaches the right-hand side through the module-level name
``_RHS``; each right-hand side gets its own copy of the kernel with that name
rebound.  Compiled copies are cached on disk, keyed by a hash of the
right-hand side's bytecode, so a fresh process skips the compile.

Right-hand sides have the signature ``f(y, t, *args) -> dy/dt``.
"""

import hashlib
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

__all__ = [
    "IvpProblem",
    "IntegratorConfig",
    "IntegrationError",
    "StepSizeUnderflow",
    "NonFiniteDerivative",
    "TooManySteps",
    "integrate",
]


# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
# b5 - b4, applied to all seven stages (FSAL)
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200,
               -22 / 525, 1 / 40])
# 4th-order continuous extension (Shampine), columns multiply theta**1..4
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_OK, _UNDERFLOW, _NONFINITE, _MAXSTEPS = 0, 1, 2, 3


class IntegrationError(RuntimeError):
    """Integration failed at time ``t``."""

    def __init__(self, message, t):
        super().__init__(f"{message} at t={t:.9g} s")
        self.t = t


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteDerivative(IntegrationError):
    pass


class TooManySteps(IntegrationError):
    pass


@dataclass
class IvpProblem:
    """Initial-value problem ``y' = f(y, t, *args)`` sampled on ``t_eval``."""

    derivative: Callable
    y0: np.ndarray
    t_span: tuple
    t_eval: np.ndarray
    args: tuple = ()

    def __post_init__(self):
        self.y0 = np.array(self.y0, dtype=float).ravel()
        self.t_eval = np.array(self.t_eval, dtype=float).ravel()
        t0, tf = (float(t) for t in self.t_span)
        self.t_span = (t0, tf)
        if tf <= t0:
            raise ValueError("t_span must satisfy t0 < tf (no backward integration)")
        if self.t_eval.size == 0:
            raise ValueError("t_eval must be nonempty")
        if np.any(np.diff(self.t_eval) <= 0):
            raise ValueError("t_eval must be strictly increasing")
        if self.t_eval[0] < t0 or self.t_eval[-1] > tf:
            raise ValueError("t_eval must lie within t_span")


@dataclass
class IntegratorConfig:
    """Tolerances and step limits.

    ``initial_step=None`` selects the first step automatically.  ``max_steps``
    bounds the work spent on a single problem; it exists so that pathological
    parameter sets fail fast instead of stalling an optimizer.
    """

    rtol: float = 1e-6
    atol: float = 1e-8
    max_step: float = np.inf
    initial_step: float | None = None
    max_steps: int = 200_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


def _rms_norm(x, scale):
    s = 0.0
    for i in range(x.shape[0]):
        r = x[i] / scale[i]
        s += r * r
    return np.sqrt(s / x.shape[0])


def _all_finite(x):
    for i in range(x.shape[0]):
        if not np.isfinite(x[i]):
            return False
    return True


# rebound per kernel copy, see _kernel_for
_RHS = None


def _dopri5(y0, t0, tf, t_eval, args, rtol, atol, max_step, h0, max_steps,
            A, C, E, P):
    n = y0.shape[0]
    m = t_eval.shape[0]
    out = np.empty((m, n))
    K = np.empty((7, n))
    y = y0.copy()
    t = t0
    eps = np.finfo(np.float64).eps

    f0 = _RHS(y, t, *args)
    for i in range(n):
        K[0, i] = f0[i]
    if not _all_finite(K[0]):
        return out, _NONFINITE, t

    scale = np.empty(n)
    for i in range(n):
        scale[i] = atol + rtol * abs(y[i])

    if h0 > 0.0:
        h = h0
    else:
        # Hairer & Wanner's starting-step heuristic
        d0 = _rms_norm(y, scale)
        d1 = _rms_norm(K[0], scale)
        if d0 < 1e-5 or d1 < 1e-5:
            ha = 1e-6
        else:
            ha = 0.01 * d0 / d1
        ha = min(ha, tf - t0)
        y1 = y + ha * K[0]
        f1 = _RHS(y1, t + ha, *args)
        d2 = _rms_norm(f1 - K[0], scale) / ha
        if d1 <= 1e-15 and d2 <= 1e-15:
            hb = max(1e-6, ha * 1e-3)
        else:
            hb = (0.01 / max(d1, d2)) ** 0.2
        h = min(100.0 * ha, hb)
    h = min(h, max_step, tf - t0)

    j = 0
    while j < m and t_eval[j] <= t0:
        out[j, :] = y
        j += 1

    ynew = np.empty(n)
    err = np.empty(n)
    ytmp = np.empty(n)
    th = np.empty(4)
    steps = 0
    rejected = False
    while t < tf:
        if steps >= max_steps:
            return out, _MAXSTEPS, t
        min_step = 10.0 * eps * max(abs(t), 1.0)
        if h < min_step:
            return out, _UNDERFLOW, t
        last = t + h >= tf
        if last:
            h = tf - t

        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for r in range(s):
                    acc += A[s, r] * K[r, i]
                ytmp[i] = y[i] + h * acc
            ks = _RHS(ytmp, t + C[s] * h, *args)
            for i in range(n):
                K[s, i] = ks[i]
        # stage 7 is evaluated at the 5th-order solution (FSAL)
        for i in range(n):
            ynew[i] = ytmp[i]
        if not _all_finite(ynew) or not _all_finite(K[6]):
            return out, _NONFINITE, t

        for i in range(n):
            acc = 0.0
            for r in range(7):
                acc += E[r] * K[r, i]
            err[i] = h * acc
            scale[i] = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        err_norm = _rms_norm(err, scale)

        if err_norm <= 1.0:
            t_new = tf if last else t + h
            steps += 1
            # dense output for every grid point inside (t, t_new]
            while j < m and t_eval[j] <= t_new:
                theta = (t_eval[j] - t) / h
                th[0] = theta
                th[1] = theta * theta
                th[2] = th[1] * theta
                th[3] = th[2] * theta
                for i in range(n):
                    acc = 0.0
                    for r in range(7):
                        q = 0.0
                        for c in range(4):
                            q += P[r, c] * th[c]
                        acc += K[r, i] * q
                    out[j, i] = y[i] + h * acc
                j += 1
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[6, i]
            t = t_new
            if err_norm == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, 0.9 * err_norm ** -0.2)
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            h = min(h * factor, max_step)
        else:
            h = h * max(0.2, 0.9 * err_norm ** -0.2)
            rejected = True

    while j < m:
        out[j, :] = y
        j += 1
    return out, _OK, t


_rms_norm_jit = numba.njit(cache=True)(_rms_norm)
_all_finite_jit = numba.njit(cache=True)(_all_finite)
_compiled = {}


def _bind(rhs, name, helpers):
    g = dict(globals())
    g["_RHS"] = rhs
    g.update(helpers)
    fn = type(_dopri5)(_dopri5.__code__, g, name)
    fn.__qualname__ = name
    return fn


def _rhs_tag(rhs):
    code = rhs.py_func.__code__
    h = hashlib.sha1(code.co_code + repr(code.co_consts).encode())
    return f"{rhs.py_func.__module__}.{rhs.py_func.__qualname__}.{h.hexdigest()[:12]}"


def _kernel_for(rhs):
    """Compiled kernel calling ``rhs``; built once per process and cached on disk."""
    kernel = _compiled.get(rhs)
    if kernel is None:
        name = "_dopri5_" + "".join(c if c.isalnum() else "_" for c in _rhs_tag(rhs))
        fn = _bind(rhs, name, {"_rms_norm": _rms_norm_jit, "_all_finite": _all_finite_jit})
        kernel = _compiled[rhs] = numba.njit(cache=True)(fn)
    return kernel


def integrate(problem: IvpProblem, config: IntegratorConfig | None = None) -> np.ndarray:
    """Integrate ``problem`` and return an array of shape ``(len(t_eval), n)``.

    Uses the compiled kernel when ``problem.derivative`` is a numba dispatcher,
    the pure-Python kernel otherwise.  Output is deterministic for a given
    problem and config.

    Raises
    ------
    StepSizeUnderflow
        The step size collapsed below floating-point resolution.
    NonFiniteDerivative
        The right-hand side returned inf or nan.
    TooManySteps
        ``config.max_steps`` accepted steps did not reach ``tf``.
    """
    config = config or IntegratorConfig()
    fun = problem.derivative
    if isinstance(fun, numba.core.registry.CPUDispatcher):
        kernel = _kernel_for(fun)
    else:
        def wrapped(y, t, *args):
            return np.asarray(fun(y, t, *args), dtype=float)

        kernel = _bind(wrapped, "_dopri5", {})

    t0, tf = problem.t_span
    h0 = 0.0 if config.initial_step is None else float(config.initial_step)
    out, status, t_fail = kernel(
        problem.y0, t0, tf, problem.t_eval, tuple(problem.args),
        float(config.rtol), float(config.atol), float(config.max_step), h0,
        int(config.max_steps), _A, _C, _E, _P,
    )
    if status == _UNDERFLOW:
        raise StepSizeUnderflow("step size underflow", t_fail)
    if status == _NONFINITE:
        raise NonFiniteDerivative("non-finite derivative", t_fail)
    if status == _MAXSTEPS:
        raise TooManySteps(f"exceeded {config.max_steps} steps", t_fail)
    return out
