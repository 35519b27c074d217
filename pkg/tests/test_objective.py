import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import imident.objective as objective_mod
from imident.motor import TRUE_PARAMS, CurrentWaveform
from imident.objective import (
    FAILED_FITNESS,
    DEFAULT_SPACE,
    Budget,
    BudgetExhausted,
    FitnessValue,
    MotorObjective,
    Objective,
    SearchSpace,
    clamp_lower,
    evaluate,
    sample_uniform,
    waveform_error,
)
from imident.ode import IntegratorConfig

TRUE = TRUE_PARAMS.as_array()


def test_default_bounds():
    assert DEFAULT_SPACE.lower == (1.0, 1.0, 0.002, 0.05, 0.00005)
    assert DEFAULT_SPACE.upper == (20.0, 20.0, 1.0, 5.0, 0.001)
    assert DEFAULT_SPACE.names == ("Rs", "Rr", "Lleak", "Lm", "J")


def test_invalid_space():
    with pytest.raises(ValueError):
        SearchSpace(lower=(1, 1, 1, 1, 1), upper=(1, 2, 2, 2, 2))


def test_self_fitness_is_integrator_noise(short_supply, candidate_integrator, reference_short):
    budget = Budget(10)
    fv = evaluate(TRUE, reference_short, short_supply, candidate_integrator, budget)
    assert fv.value <= 1e-6
    assert fv.index == 1 and budget.consumed == 1


def test_constant_offset_integrates_to_three_c_t(reference_short):
    c = 0.25
    r = reference_short
    shifted = CurrentWaveform(r.t, r.i1 + c, r.i2 + c, r.i3 + c)
    assert waveform_error(r, shifted) == pytest.approx(3 * c * r.t[-1], rel=1e-12)


def test_perturbed_resistance_scores_positive(short_supply, candidate_integrator,
                                              reference_short):
    theta = TRUE * [1.1, 1, 1, 1, 1]
    fv = evaluate(theta, reference_short, short_supply, candidate_integrator, Budget(1))
    assert fv.value > 1e-3


def test_evaluate_preconditions(short_supply, candidate_integrator, reference_short):
    budget = Budget(1)
    with pytest.raises(ValueError):
        evaluate(TRUE * [-1, 1, 1, 1, 1], reference_short, short_supply,
                 candidate_integrator, budget)
    evaluate(TRUE, reference_short, short_supply, candidate_integrator, budget)
    with pytest.raises(BudgetExhausted):
        evaluate(TRUE, reference_short, short_supply, candidate_integrator, budget)
    assert budget.consumed == 1


def test_fitness_value_non_negative():
    with pytest.raises(ValueError):
        FitnessValue(-1.0, 1)


def test_clamp_lower_examples():
    theta = np.array([0.5, 6.61, 0.09718, 1.6816, 0.00077])
    assert np.array_equal(clamp_lower(theta, DEFAULT_SPACE), [1.0, *theta[1:]])
    above = TRUE.copy()
    above[3] = 7.0
    assert np.array_equal(clamp_lower(above, DEFAULT_SPACE), above)
    assert np.array_equal(clamp_lower(TRUE, DEFAULT_SPACE), TRUE)


def test_sample_uniform_statistics():
    rng = np.random.default_rng(0)
    x = np.array([sample_uniform(DEFAULT_SPACE, rng) for _ in range(10_000)])
    lo, hi = DEFAULT_SPACE.lo, DEFAULT_SPACE.hi
    assert np.all((x >= lo) & (x <= hi))
    se = (hi - lo) / np.sqrt(12) / np.sqrt(len(x))
    assert np.all(np.abs(x.mean(axis=0) - (lo + hi) / 2) < 3 * se)


def test_sample_uniform_deterministic():
    a = [sample_uniform(DEFAULT_SPACE, np.random.default_rng(7)) for _ in range(3)]
    b = [sample_uniform(DEFAULT_SPACE, np.random.default_rng(7)) for _ in range(3)]
    assert np.array_equal(a, b)


@given(st.permutations([0, 1, 2]))
def test_phase_relabeling_invariance(perm):
    rng = np.random.default_rng(1)
    t = np.linspace(0, 0.1, 51)
    a = rng.normal(size=(3, 51))
    b = rng.normal(size=(3, 51))
    ref, cand = CurrentWaveform(t, *a), CurrentWaveform(t, *b)
    ref_p, cand_p = CurrentWaveform(t, *a[list(perm)]), CurrentWaveform(t, *b[list(perm)])
    assert waveform_error(ref_p, cand_p) == pytest.approx(waveform_error(ref, cand), rel=1e-12)


def test_budget_counts_simulate_calls(monkeypatch, short_supply, reference_short):
    calls = []
    real = objective_mod.simulate

    def counting(*args, **kw):
        calls.append(1)
        return real(*args, **kw)

    monkeypatch.setattr(objective_mod, "simulate", counting)
    obj = MotorObjective(reference_short, short_supply, budget=7)
    rng = np.random.default_rng(3)
    with pytest.raises(BudgetExhausted):
        while True:
            obj(sample_uniform(DEFAULT_SPACE, rng))
    assert len(calls) == obj.budget.consumed == obj.evaluations == 7


def test_failed_simulation_gives_sentinel(short_supply, reference_short, caplog):
    obj = MotorObjective(reference_short, short_supply, IntegratorConfig(max_steps=3), budget=2)
    assert obj(TRUE) == FAILED_FITNESS
    assert np.isfinite(FAILED_FITNESS)
    assert any("steps" in r.message for r in caplog.records)


def test_budget_is_thread_safe():
    budget = Budget(10_000)
    seen = []

    def worker():
        local = []
        try:
            while True:
                local.append(budget.charge())
        except BudgetExhausted:
            seen.extend(local)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert sorted(seen) == list(range(1, 10_001))
    assert budget.consumed == 10_000 and budget.remaining == 0


def test_objective_trace_is_best_so_far():
    values = iter([3.0, 5.0, 1.0, 2.0])
    obj = Objective(lambda x: next(values), 4)
    for _ in range(4):
        obj(np.ones(2))
    assert np.array_equal(obj.trace(), [3.0, 3.0, 1.0, 1.0])
    assert obj.best == 1.0


def test_invalid_budget():
    with pytest.raises(ValueError):
        Budget(0)
