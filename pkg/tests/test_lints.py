"""Test accelerated linear Thompson sampling and the level ladder."""
import numpy as np
import pytest

from core.bandits.lints import (
    LevelLadder,
    LinTsExactPolicy,
    LinTsPolicy,
    largest_firing_level,
    lints_baseline_select,
    lints_init,
    lints_select,
)
from core.config import AdaptiveSettings, BanditMipsConfig
from core.env import make_instance
from core.linalg.ridge import RidgeState
from core.mips import OracleBackend, PointSet

BRUTE = OracleBackend.BRUTE


def _firing(levels):
    calls = []

    def query(m):
        calls.append(m)
        return f"arm@{m}" if m in levels else None

    return query, calls


# ---------------------------------------------------------------------------
# largest_firing_level
# ---------------------------------------------------------------------------

def test_binary_search_finds_top_of_monotone_prefix():
    query, calls = _firing(set(range(1, 6)))
    assert largest_firing_level(query, 20) == (5, "arm@5")
    assert len(calls) <= 5


def test_binary_search_nothing_fires():
    query, _ = _firing(set())
    assert largest_firing_level(query, 20) == (0, None)


def test_binary_search_everything_fires():
    query, _ = _firing(set(range(1, 17)))
    assert largest_firing_level(query, 16) == (16, "arm@16")


def test_binary_search_single_level():
    query, _ = _firing({1})
    assert largest_firing_level(query, 1) == (1, "arm@1")


def test_repair_scan_recovers_isolated_level():
    # binary search probes 8, 4, 2, 1 and misses level 5
    query, _ = _firing({5})
    assert largest_firing_level(query, 16) == (0, None)
    query, calls = _firing({5})
    assert largest_firing_level(query, 16, repair_budget=5) == (5, "arm@5")
    assert calls[-3:] == [7, 6, 5]


# ---------------------------------------------------------------------------
# LevelLadder
# ---------------------------------------------------------------------------

def _ladder(backend=BRUTE, config=None, seed=0, arms=None):
    if arms is None:
        rng = np.random.default_rng(0)
        X = rng.standard_normal((32, 3))
        arms = PointSet(X / np.linalg.norm(X, axis=1, keepdims=True))
    return LevelLadder(arms, 0.25, 3.0, 0.01, 0.5, np.random.SeedSequence(seed), backend, config)


def test_level_specs():
    ladder = _ladder()
    assert ladder.size == 4
    spec = ladder.spec(2)
    assert spec.c == pytest.approx(2.0 / 3.0)
    assert spec.r == pytest.approx(1.5)
    assert spec.eps == 0.25
    assert spec.q_bar == 3.0
    assert ladder.certifiable(3)
    assert not ladder.certifiable(4)


def test_levels_are_built_lazily():
    ladder = _ladder()
    assert ladder.built == 0
    index = ladder.level(2)
    assert ladder.built == 1
    assert ladder.level(2) is index
    assert ladder.prebuild() == 3
    with pytest.raises(ValueError):
        ladder.level(5)


def test_level_seeds_do_not_depend_on_build_order():
    config = BanditMipsConfig(adaptive=AdaptiveSettings(max_oracles=2))
    a = _ladder(OracleBackend.LSH, config, seed=5)
    b = _ladder(OracleBackend.LSH, config, seed=5)
    a.level(1)
    a.level(2)
    b.level(2)
    b.level(1)
    for m in (1, 2):
        planes_a = a.level(m).oracles[0].tables[0].planes
        planes_b = b.level(m).oracles[0].tables[0].planes
        assert np.array_equal(planes_a, planes_b)


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

def test_baseline_select():
    arms = PointSet([[1.0, 0.0], [0.0, 1.0]])
    assert lints_baseline_select(RidgeState.fresh(2), arms, [1.0, 0.0]) == 0
    assert lints_baseline_select(RidgeState.fresh(2), arms, [0.0, 0.0]) == 0
    assert lints_baseline_select(RidgeState.fresh(2), arms, [0.1, 0.3]) == 1


def test_norm_guard_falls_back_to_exact_scan():
    arms = PointSet([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    state = lints_init(arms, horizon=50, delta=0.1, eta=0.25, seed=0, backend=BRUTE)
    state.ridge.theta_hat = np.array([1000.0, 0.0])
    sel = lints_select(state)
    assert sel.fallback and sel.norm_violation
    assert sel.arm == 0
    assert state.norm_violations == 1


def test_init_constants():
    arms = PointSet(np.eye(2))
    state = lints_init(arms, horizon=50, delta=0.1, eta=0.25, seed=0, backend=BRUTE)
    assert state.delta_prime == pytest.approx(0.1 / 200)
    assert state.q_bar == pytest.approx(1 + state.beta + state.gamma)
    assert state.ladder.size == 4


def test_selections_are_certified_and_near_optimal():
    env = make_instance("sphere-uniform", 20, 3, seed=6, noise_std=0.1)
    eta = 0.25
    policy = LinTsPolicy(env.arms, horizon=60, delta=0.1, eta=eta, seed=2, backend=BRUTE)
    state = policy.state
    for _ in range(60):
        sel = policy.select()
        scores = env.arms.points @ policy.theta_tilde
        if sel.tier > 0:
            m = sel.tier
            assert sel.value >= (1 - 1 / (m + 1)) * state.q_bar * m * eta - eta - 1e-9
        loss = scores.max() - scores[env.arms.row(sel.arm)]
        assert loss <= (3 + state.beta + state.gamma) * eta
        policy.update(sel.arm, env.pull(sel.arm))


def test_tiny_eta_matches_exact_policy():
    env = make_instance("planted-gap", 20, 4, seed=7, noise_std=0.0)
    T, delta = 40, 0.05
    fast = LinTsPolicy(env.arms, T, delta, eta=1e-6, seed=5, backend=BRUTE)
    exact = LinTsExactPolicy(env.arms, T, delta, seed=5)
    assert exact.beta == pytest.approx(fast.state.beta)
    for _ in range(T):
        a = fast.select().arm
        b = exact.select().arm
        assert np.allclose(fast.theta_tilde, exact.theta_tilde)
        assert a == b
        reward = env.pull(a)
        fast.update(a, reward)
        exact.update(b, reward)


def test_baseline_matches_loop():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((40, 5))
    arms = PointSet(X / np.linalg.norm(X, axis=1, keepdims=True))
    theta = rng.standard_normal(5)
    expected = max(arms.ids, key=lambda i: (float(arms.vector(i) @ theta), -int(i)))
    assert lints_baseline_select(RidgeState.fresh(5), arms, theta) == expected


def test_single_arm_is_always_selected():
    arms = PointSet([[0.6, 0.8]])
    policy = LinTsPolicy(arms, horizon=20, delta=0.1, eta=0.25, seed=1, backend=BRUTE)
    for _ in range(20):
        sel = policy.select()
        assert sel.arm == 0
        policy.update(sel.arm, 1.0)


def test_two_arm_level_certificates():
    arms = PointSet(np.eye(2))
    theta_star = np.array([1.0, 0.0])
    eta = 0.1
    policy = LinTsPolicy(arms, horizon=80, delta=0.1, eta=eta, seed=3, backend=BRUTE)
    q_bar = policy.state.q_bar
    for _ in range(80):
        sel = policy.select()
        if sel.tier > 0:
            m = sel.tier
            value = float(arms.vector(sel.arm) @ policy.theta_tilde)
            assert value >= (1 - 1 / (m + 1)) * q_bar * m * eta - eta - 1e-9
        policy.update(sel.arm, float(arms.vector(sel.arm) @ theta_star))
