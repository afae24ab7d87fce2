"""Test the hyperplane LSH oracle."""
import math

import numpy as np
import pytest
from scipy import stats

from core.config import LshSettings
from core.mips import AnnSpec, MipsSpec, ann_params, build_lsh, lift_points, lift_query
from core.mips.lsh import collision_probability, table_parameters


def _unit(rng, n, dim):
    g = rng.standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _ann(c_prime, r_prime):
    return AnnSpec(c_prime=c_prime, r_prime=r_prime, rho_q=(2 * c_prime**2 - 1) / c_prime**4)


def test_collision_probability():
    assert collision_probability(0.0) == pytest.approx(1.0)
    assert collision_probability(2.0) == pytest.approx(0.0)
    # distance 1 between unit vectors is an angle of pi/3
    assert collision_probability(1.0) == pytest.approx(2.0 / 3.0)


def test_table_parameters_reach_target_failure():
    k, L, capped = table_parameters(1024, _ann(1.5, 0.8), 0.5, LshSettings(max_tables=None))
    assert k == 10
    assert not capped
    p_k = collision_probability(0.8) ** k
    assert (1 - p_k) ** L <= 0.5
    assert (1 - p_k) ** (L - 1) > 0.5


def test_table_parameters_cap():
    k, L, capped = table_parameters(1 << 20, _ann(1.1, 1.4), 0.01, LshSettings(max_tables=16))
    assert L == 16
    assert capped


def test_build_rejects_unit_c_prime():
    lifted = lift_points(np.eye(3))
    with pytest.raises(ValueError, match="no sublinear"):
        build_lsh(lifted, _ann(1.0, 0.5), 0.5, seed=0)


def test_build_rejects_bad_failure_probability():
    lifted = lift_points(np.eye(3))
    with pytest.raises(ValueError):
        build_lsh(lifted, _ann(1.5, 0.5), 1.0, seed=0)


def test_build_rejects_non_unit_rows():
    with pytest.raises(ValueError, match="unit-norm"):
        build_lsh(np.full((2, 4), 0.25), _ann(1.5, 0.5), 0.5, seed=0)


def test_same_seed_same_tables():
    rng = np.random.default_rng(0)
    lifted = lift_points(_unit(rng, 64, 6))
    a = build_lsh(lifted, _ann(1.5, 0.6), 0.5, seed=7)
    b = build_lsh(lifted, _ann(1.5, 0.6), 0.5, seed=7)
    assert len(a.tables) == len(b.tables)
    for ta, tb in zip(a.tables, b.tables):
        assert np.array_equal(ta.planes, tb.planes)
        assert ta.buckets.keys() == tb.buckets.keys()


def test_every_point_in_one_bucket_per_table():
    rng = np.random.default_rng(1)
    lifted = lift_points(_unit(rng, 100, 5))
    index = build_lsh(lifted, _ann(1.5, 0.6), 0.5, seed=3)
    for table in index.tables:
        rows = np.sort(np.concatenate(list(table.buckets.values())))
        assert np.array_equal(rows, np.arange(100))


def test_singleton_index():
    ann = ann_params(MipsSpec(c=0.5, r=0.5, eps=0.0, q_bar=1.0, delta=0.5))
    index = build_lsh(lift_points([[1.0, 0.0]]), ann, 0.5, seed=0)
    assert index.query(lift_query([1.0, 0.0], 1.0)).row == 0
    assert index.query(lift_query([-1.0, 0.0], 1.0)).row is None


def test_answers_are_within_radius():
    rng = np.random.default_rng(2)
    lifted = lift_points(_unit(rng, 256, 8))
    ann = _ann(1.3, 0.7)
    index = build_lsh(lifted, ann, 0.5, seed=4)
    for q in lift_points(_unit(rng, 200, 8)):
        answer = index.query(q)
        if answer.row is not None:
            assert np.linalg.norm(lifted[answer.row] - q) <= ann.radius + 1e-9


def test_stats_report():
    rng = np.random.default_rng(3)
    lifted = lift_points(_unit(rng, 128, 6))
    index = build_lsh(lifted, _ann(1.5, 0.6), 0.5, seed=5)
    index.query(lifted[0])
    stats = index.stats()
    assert stats.num_points == 128
    assert stats.tables == len(index.tables)
    assert stats.queries == 1
    assert sum(size * count for size, count in stats.occupancy_histogram.items()) == 128 * stats.tables


@pytest.mark.parametrize("c_prime", [1.2, 1.5, 2.0])
def test_planted_neighbour_recall(c_prime):
    dim, K, r_prime, fail = 18, 256, 0.5, 0.1
    rng = np.random.default_rng(int(c_prime * 10))
    ann = _ann(c_prime, r_prime)
    misses = 0
    trials = 200
    for trial in range(trials):
        q = _unit(rng, 1, dim)[0]
        u = rng.standard_normal(dim)
        u -= (u @ q) * q
        u /= np.linalg.norm(u)
        phi = 2.0 * math.asin(0.45 * r_prime)  # chord 0.9 r'
        planted = math.cos(phi) * q + math.sin(phi) * u
        others = _unit(rng, K - 1, dim)
        others = others[np.linalg.norm(others - q, axis=1) >= 1.1 * c_prime * r_prime]
        lifted = np.vstack([planted, others])
        index = build_lsh(lifted, ann, fail, seed=trial)
        misses += index.query(q).row != 0
    # miss rate <= fail at 99% confidence
    assert stats.binomtest(misses, trials, fail, alternative="greater").pvalue >= 0.01


@pytest.mark.slow
def test_probe_fraction_shrinks_with_k():
    rng = np.random.default_rng(11)
    ann = _ann(1.5, 0.8)
    fractions = []
    for K in (1024, 2048, 4096):
        lifted = lift_points(_unit(rng, K, 16))
        index = build_lsh(lifted, ann, 0.5, seed=K)
        for q in lift_points(_unit(rng, 200, 16)):
            index.query(q)
        fractions.append(index.stats().mean_probes / K)
    assert fractions[-1] < 0.5
    assert fractions[0] > fractions[1] > fractions[2]


def test_far_query_is_never_answered():
    # every stored point is at lifted distance 2 from the query
    lifted = lift_points(np.tile([1.0, 0.0, 0.0], (8, 1)))
    index = build_lsh(lifted, _ann(1.2, 0.5), 0.5, seed=0)
    for _ in range(20):
        assert index.query(lift_query([-1.0, 0.0, 0.0], 1.0)).row is None
