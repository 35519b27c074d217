import numpy as np
import pytest

from imident.motor import TRUE_PARAMS, SupplyProfile, simulate
from imident.ode import IntegratorConfig


class FixedRng:
    """Generator stand-in whose uniform draws are all ``value``."""

    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value, dtype=float)


class SequenceRng:
    """Returns queued arrays from ``random`` in order."""

    def __init__(self, *draws):
        self.draws = [np.asarray(d, dtype=float) for d in draws]

    def random(self, size=None):
        out = self.draws.pop(0)
        return out if size is None else np.broadcast_to(out, size).copy()


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


@pytest.fixture(scope="session")
def short_supply():
    return SupplyProfile(horizon=0.5)


@pytest.fixture(scope="session")
def candidate_integrator():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def reference_short(short_supply, candidate_integrator):
    return simulate(TRUE_PARAMS, short_supply, candidate_integrator)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
