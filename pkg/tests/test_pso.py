import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FixedRng, sphere
from imident.objective import DEFAULT_SPACE, Objective, SearchSpace
from imident.pso import (
    ClubConfig,
    ClubRegistry,
    PsoConfig,
    membership_update,
    neighborhood_best,
    neighborhood_matrix,
    position_update,
    pso_run,
    velocity_update,
)

SPHERE_SPACE = SearchSpace(names=tuple("abcde"), lower=(-5.12,) * 5, upper=(5.12,) * 5)

# snapshot with six clubs and eight particles, written 1-based as in the usual drawing
SNAPSHOT_CLUBS = {1: {4, 5, 6}, 2: {1, 2, 3, 4}, 3: {1, 2, 3}, 4: {1, 5}, 5: {3, 5, 6},
             6: {2, 4, 6}, 7: {1, 4, 6}, 8: {2, 5, 6}}
# particle 3 is the best, particle 5 the worst
SNAPSHOT_PBEST = np.array([4.0, 5.0, 1.0, 6.0, 9.0, 3.0, 7.0, 8.0])


def snapshot_registry():
    cfg = ClubConfig(n_clubs=6, default=3, min_membership=2, max_membership=5, retention=10)
    return ClubRegistry([sorted(c - 1 for c in SNAPSHOT_CLUBS[p]) for p in range(1, 9)], cfg)


def test_velocity_zero_when_at_attractors():
    x = np.array([2.0, 3.0])
    v = velocity_update(x, np.zeros(2), x, x, PsoConfig(), np.random.default_rng(0))
    assert np.array_equal(v, [0.0, 0.0])


@pytest.mark.parametrize("config", [PsoConfig.global_best(), PsoConfig.clubs()])
def test_velocity_hand_example(config):
    v = velocity_update(np.zeros(1), np.ones(1), np.full(1, 0.5), np.ones(1), config,
                        FixedRng(0.5))
    assert v[0] == pytest.approx(1.8495, abs=1e-12)


def test_constriction_scales_velocity():
    cfg = PsoConfig(constriction=0.5)
    v = velocity_update(np.zeros(1), np.ones(1), np.full(1, 0.5), np.ones(1), cfg,
                        FixedRng(0.5))
    assert v[0] == pytest.approx(0.5 * 1.8495)


def test_position_examples():
    lo = DEFAULT_SPACE.lo
    assert np.array_equal(position_update(lo, np.zeros(5), DEFAULT_SPACE), lo)
    x = np.array([2, 2, 0.5, 2, 0.0005])
    new = position_update(x, np.array([1.0, 0, 0, 0, 0]), DEFAULT_SPACE)
    assert np.array_equal(new, [3, 2, 0.5, 2, 0.0005])
    new = position_update(x, np.array([-5.0, 0, 0, 10.0, 0]), DEFAULT_SPACE)
    assert np.array_equal(new, [1.0, 2, 0.5, 12.0, 0.0005])


def test_global_neighborhood_best():
    nb = neighborhood_matrix("global", 3)
    f = np.array([5.0, 2.0, 7.0])
    assert [neighborhood_best(i, f, nb) for i in range(3)] == [1, 1, 1]


def test_ring_neighborhood_best():
    nb = neighborhood_matrix("ring", 5)
    assert set(np.flatnonzero(nb[0])) == {4, 0, 1}
    assert neighborhood_best(0, np.array([5.0, 2.0, 7.0, 1.0, 9.0]), nb) == 1


def test_ties_go_to_lowest_index():
    nb = neighborhood_matrix("global", 4)
    assert neighborhood_best(3, np.array([2.0, 1.0, 1.0, 1.0]), nb) == 1


def test_club_neighborhood_of_snapshot():
    nb = neighborhood_matrix("clubs", 8, snapshot_registry())
    # particle 3 shares clubs 1, 2, 3 with particles 2, 4, 5, 6, 7, 8
    expected = {p for p, c in SNAPSHOT_CLUBS.items() if c & SNAPSHOT_CLUBS[3]}
    assert {i + 1 for i in np.flatnonzero(nb[2])} == expected


def _choices(iteration, n=300):
    out = {}
    for seed in range(n):
        reg = snapshot_registry()
        membership_update(reg, SNAPSHOT_PBEST, iteration, np.random.default_rng(seed))
        for it, j, action, club, rule in reg.events:
            out.setdefault((j + 1, action, rule), set()).add(club + 1)
    return out


def test_snapshot_extremes():
    seen = _choices(iteration=1)
    assert seen[(3, "leave", "best")] == {1, 2, 3}
    assert seen[(5, "join", "worst")] == {1, 2, 4}
    # no regression off the retention period
    assert not any(rule == "regress" for _, _, rule in seen)


def test_snapshot_regression():
    seen = _choices(iteration=10)
    assert seen[(2, "leave", "regress")] == {1, 2, 3, 4}
    assert seen[(4, "join", "regress")] == {2, 3, 4, 6}
    assert (3, "leave", "regress") not in seen and (5, "join", "regress") not in seen


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 15), st.integers(1, 4))
def test_membership_bounds_hold(seed, n, lo):
    rng = np.random.default_rng(seed)
    cfg = ClubConfig(n_clubs=12, default=lo + 2, min_membership=lo,
                     max_membership=lo + 4, retention=3)
    reg = ClubRegistry.random(n, cfg, rng)
    for it in range(1, 30):
        before = [list(m) for m in reg.memberships]
        n_events = len(reg.events)
        membership_update(reg, rng.random(n), it, rng)
        sizes = reg.sizes()
        assert np.all((sizes >= cfg.min_membership) & (sizes <= cfg.max_membership))
        assert all(len(set(m)) == len(m) for m in reg.memberships)
        replay = [set(m) for m in before]
        for _, j, action, club, _ in reg.events[n_events:]:
            assert (club in replay[j]) == (action == "leave")
            (replay[j].remove if action == "leave" else replay[j].add)(club)
        assert replay == [set(m) for m in reg.memberships]


def test_budget_gives_exact_iteration_count():
    rec = pso_run(Objective(sphere, 100_000), SPHERE_SPACE, PsoConfig(), seed=0)
    assert rec.iterations == 5000
    assert rec.evaluations == 100_000
    assert len(rec.best_particle) == 5000


def test_partial_final_iteration_counts():
    rec = pso_run(Objective(sphere, 50), SPHERE_SPACE, PsoConfig(), seed=0)
    assert rec.iterations == 3 and rec.evaluations == 50


def test_constant_fitness_still_moves():
    frames = []
    pso_run(Objective(lambda x: 1.0, 200), SPHERE_SPACE, PsoConfig(), seed=1,
            observer=lambda s: frames.append((s["x"].copy(), s["pbest_f"].copy())))
    assert not np.array_equal(frames[0][0], frames[-1][0])
    assert all(np.all(f == 1.0) for _, f in frames)


@pytest.mark.parametrize("config", [PsoConfig.global_best(), PsoConfig.ring(),
                                    PsoConfig.clubs()])
def test_sphere_converges(config):
    clubs = ClubConfig()
    rec = pso_run(Objective(sphere, 10_000), SPHERE_SPACE, config, clubs, seed=0)
    assert rec.fitness < 1e-3
    assert np.all(np.diff(rec.best) <= 0)


def test_pbest_never_increases():
    frames = []
    pso_run(Objective(sphere, 2000), SPHERE_SPACE, PsoConfig.clubs(), seed=3,
            observer=lambda s: frames.append(s["pbest_f"].copy()))
    assert np.all(np.diff(np.array(frames), axis=0) <= 0)


def test_single_club_reproduces_global_best():
    a = pso_run(Objective(sphere, 3000), SPHERE_SPACE, PsoConfig.global_best(), seed=5)
    b = pso_run(Objective(sphere, 3000), SPHERE_SPACE, PsoConfig(topology="clubs"), seed=5,
                registry=ClubRegistry.single_club(20))
    assert np.array_equal(a.best, b.best)
    assert np.array_equal(a.theta, b.theta)


def test_first_iteration_matches_straight_line_version():
    seed, n, d = 11, 20, 5
    frames = []
    pso_run(Objective(sphere, 2 * n), SPHERE_SPACE, PsoConfig(), seed=seed,
            observer=lambda s: frames.append(s["x"].copy()))

    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])
    lo, width = SPHERE_SPACE.lo, SPHERE_SPACE.width
    x = lo + rng.random((n, d)) * width
    v = (2 * rng.random((n, d)) - 1) * width * 0.1
    f = np.array([np.sum(xi ** 2) for xi in x])
    g = x[np.argmin(f)].copy()
    for i in range(n):
        r1, r2 = rng.random(d), rng.random(d)
        v[i] = 0.729 * v[i] + 1.494 * r1 * (x[i] - x[i]) + 1.494 * r2 * (g - x[i])
        x[i] = np.maximum(x[i] + v[i], lo)
    assert np.array_equal(frames[0], x)


def test_seeded_runs_repeat():
    a = pso_run(Objective(sphere, 1000), SPHERE_SPACE, PsoConfig.clubs(), ClubConfig(), seed=2)
    b = pso_run(Objective(sphere, 1000), SPHERE_SPACE, PsoConfig.clubs(), ClubConfig(), seed=2)
    assert np.array_equal(a.best, b.best)
    assert np.array_equal(a.best_particle, b.best_particle)


@pytest.mark.parametrize("kw", [dict(swarm_size=1), dict(topology="star"),
                                dict(inertia=np.inf)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        PsoConfig(**kw)


def test_invalid_club_config():
    with pytest.raises(ValueError):
        ClubConfig(min_membership=12, default=10)
