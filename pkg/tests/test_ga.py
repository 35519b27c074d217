import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SequenceRng, sphere
from imident.ga import (
    GaConfig,
    ga_run,
    polynomial_mutation,
    sbx_crossover,
    survival_selection,
    tournament,
)
from imident.objective import DEFAULT_SPACE, Objective, SearchSpace

SPHERE_SPACE = SearchSpace(names=tuple("abcde"), lower=(-5.12,) * 5, upper=(5.12,) * 5)
P1 = np.array([2.0, 3.0, 0.5, 1.0, 0.0005])
P2 = np.array([10.0, 5.0, 0.1, 3.0, 0.0009])


def test_sbx_midpoint_draw_returns_parents():
    # every gene crossed, u = 0.5 everywhere
    c1, c2 = sbx_crossover(P1, P2, 15, SequenceRng(np.zeros(5), np.full(5, 0.5)))
    assert np.allclose(c1, P1, rtol=1e-15) and np.allclose(c2, P2, rtol=1e-15)


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=5, max_size=5),
       st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_sbx_preserves_parent_mean(u, mask):
    rng = SequenceRng(np.array(mask), np.array(u))
    _, (r1, r2) = sbx_crossover(P1, P2, 15, rng, DEFAULT_SPACE, return_unclamped=True)
    assert np.allclose((r1 + r2) / 2, (P1 + P2) / 2, rtol=1e-12, atol=0)


@given(st.integers(0, 2 ** 32 - 1))
def test_sbx_identical_parents(seed):
    c1, c2 = sbx_crossover(P1, P1, 15, np.random.default_rng(seed), DEFAULT_SPACE)
    assert np.array_equal(c1, P1) and np.array_equal(c2, P1)


@given(st.integers(0, 2 ** 32 - 1))
def test_sbx_children_respect_lower_bounds(seed):
    lo = DEFAULT_SPACE.lo
    c1, c2 = sbx_crossover(lo, 2 * DEFAULT_SPACE.hi, 1.0, np.random.default_rng(seed),
                           DEFAULT_SPACE, gene_swap_rate=1.0)
    assert np.all(c1 >= lo) and np.all(c2 >= lo)


def test_mutation_midpoint_is_identity():
    out = polynomial_mutation(P1, 15, 1.0, DEFAULT_SPACE, SequenceRng(np.zeros(5),
                                                                      np.full(5, 0.5)))
    assert np.array_equal(out, P1)


def test_mutation_at_zero_clamps_to_lower_bound():
    out = polynomial_mutation(P1, 15, 1.0, DEFAULT_SPACE, SequenceRng(np.zeros(5),
                                                                      np.zeros(5)))
    assert np.array_equal(out, DEFAULT_SPACE.lo)


@given(st.integers(0, 2 ** 32 - 1))
def test_zero_mutation_rate_is_identity(seed):
    out = polynomial_mutation(P2, 15, 0.0, DEFAULT_SPACE, np.random.default_rng(seed))
    assert np.array_equal(out, P2)


class ScriptedIntegers:
    def __init__(self, *picks):
        self.picks = list(picks)

    def integers(self, high, size=None):
        out = self.picks.pop(0)
        return np.asarray(out) if size is not None else out


def test_tournament_lower_fitness_wins():
    f = np.array([3.0, 7.0])
    assert tournament(f, 2, ScriptedIntegers([1, 0])) == 0
    assert tournament(f, 2, ScriptedIntegers([0, 1])) == 0


def test_tournament_tie_goes_to_first_drawn():
    assert tournament(np.array([1.0, 1.0]), 2, ScriptedIntegers([1, 0])) == 1


@given(st.integers(0, 2 ** 32 - 1))
def test_survival_keeps_pool_best(seed):
    rng = np.random.default_rng(seed)
    cfg = GaConfig(population_size=10)
    pool_f = rng.random(20) + 1.0
    pool_f[rng.integers(20)] = 0.0
    chosen = survival_selection(np.zeros((20, 5)), pool_f, cfg, rng)
    assert len(chosen) == 10
    assert 0.0 in pool_f[chosen]


def test_survival_of_identical_pool():
    x = np.tile(P1, (20, 1))
    chosen = survival_selection(x, np.ones(20), GaConfig(population_size=10),
                                np.random.default_rng(0))
    assert np.array_equal(x[chosen], np.tile(P1, (10, 1)))


def test_generation_count_from_budget():
    rec = ga_run(Objective(sphere, 100_000), SPHERE_SPACE, GaConfig(), seed=0)
    # 50 initial evaluations, then 50 offspring per generation
    assert rec.iterations == 1999
    assert rec.evaluations == 100_000


def test_population_size_and_bounds_every_generation():
    frames = []
    ga_run(Objective(sphere, 3000), SPHERE_SPACE, GaConfig(mutation_rate=0.5), seed=4,
           observer=lambda s: frames.append(s["population"].copy()))
    assert all(p.shape == (50, 5) for p in frames)
    assert all(np.all(p >= SPHERE_SPACE.lo) for p in frames)


def test_sphere_surrogate():
    rec = ga_run(Objective(sphere, 10_000), SPHERE_SPACE, GaConfig(), seed=0)
    assert rec.fitness < 1e-2
    assert np.all(np.diff(rec.best) <= 0)


def test_generation_best_never_worsens():
    frames = []
    ga_run(Objective(sphere, 5000), SPHERE_SPACE, GaConfig(), seed=1,
           observer=lambda s: frames.append(s["fitness"].min()))
    assert np.all(np.diff(frames) <= 0)


def test_seeded_runs_repeat():
    a = ga_run(Objective(sphere, 2000), SPHERE_SPACE, seed=9)
    b = ga_run(Objective(sphere, 2000), SPHERE_SPACE, seed=9)
    assert np.array_equal(a.best, b.best)


@pytest.mark.parametrize("kw", [dict(population_size=51), dict(crossover_rate=1.5),
                                dict(eta_c=0.0), dict(tournament_size=1)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        GaConfig(**kw)
