"""Test point sets, the MIPS -> ANN reduction and brute-force MIPS."""
import numpy as np
import pytest

from core.mips import (
    MipsSpec,
    PointSet,
    ann_params,
    brute_force_mips,
    lift_point,
    lift_points,
    lift_queries,
    lift_query,
)


# ---------------------------------------------------------------------------
# PointSet
# ---------------------------------------------------------------------------

def test_point_set_sorts_rows_by_id():
    ps = PointSet([[0.0, 1.0], [1.0, 0.0]], ids=[7, 3])
    assert list(ps.ids) == [3, 7]
    assert np.array_equal(ps.vector(3), [1.0, 0.0])
    assert ps.row(7) == 1
    assert ps.size == 2 and ps.dim == 2


def test_point_set_is_read_only():
    ps = PointSet([[0.5, 0.5]])
    with pytest.raises(ValueError):
        ps.points[0, 0] = 0.0


def test_point_set_validation():
    with pytest.raises(ValueError):
        PointSet([[1.0, 1.0]])
    with pytest.raises(ValueError):
        PointSet([[0.1, 0.1], [0.2, 0.2]], ids=[1, 1])
    with pytest.raises(ValueError):
        PointSet([[np.nan, 0.0]])
    with pytest.raises(ValueError):
        PointSet([[0.1], [0.2]]).row(5)


def test_point_set_subset_and_map():
    ps = PointSet([[0.1, 0.0], [0.0, 0.2], [0.3, 0.0]], ids=[10, 20, 30])
    sub = ps.subset([30, 10])
    assert list(sub.ids) == [10, 30]
    doubled = ps.map(lambda pts: pts * 2.0)
    assert np.allclose(doubled.vector(30), [0.6, 0.0])
    assert list(doubled.ids) == [10, 20, 30]


def test_point_set_csv(tmp_path):
    ps = PointSet([[0.6, 0.8], [-0.25, 0.125]])
    loaded = PointSet.from_csv(ps.to_csv(tmp_path / "arms.csv"))
    assert np.array_equal(loaded.points, ps.points)
    assert list(loaded.ids) == [0, 1]


# ---------------------------------------------------------------------------
# Lifting
# ---------------------------------------------------------------------------

def test_lift_point_examples():
    assert np.allclose(lift_point([1.0, 0.0]), [1.0, 0.0, 0.0, 0.0])
    assert np.allclose(lift_point([0.0, 0.0]), [0.0, 0.0, 1.0, 0.0])


def test_lift_query_examples():
    assert np.allclose(lift_query([2.0, 0.0], 2.0), [1.0, 0.0, 0.0, 0.0])
    assert np.allclose(lift_query([0.0, 0.0], 2.0), [0.0, 0.0, 0.0, 1.0])


def test_lift_rejects_out_of_range():
    with pytest.raises(ValueError, match="exceeds 1"):
        lift_point([1.0, 0.5])
    with pytest.raises(ValueError):
        lift_query([3.0, 0.0], 2.0)
    with pytest.raises(ValueError):
        lift_points([[0.9, 0.9]])


def test_lift_boundary_is_accepted():
    assert np.isclose(np.linalg.norm(lift_query([0.0, 2.0], 2.0)), 1.0)
    assert np.isclose(np.linalg.norm(lift_point([0.0, 1.0])), 1.0)


def test_lifted_distance_identity():
    rng = np.random.default_rng(0)
    q_bar = 2.0
    P = rng.standard_normal((500, 6))
    P /= np.maximum(1.0, np.linalg.norm(P, axis=1, keepdims=True))
    Q = rng.standard_normal((500, 6))
    Q *= q_bar * rng.uniform(size=(500, 1)) / np.linalg.norm(Q, axis=1, keepdims=True)
    diff = lift_points(P) - lift_queries(Q, q_bar)
    lhs = np.einsum("ij,ij->i", diff, diff)
    rhs = 2.0 - 2.0 * np.einsum("ij,ij->i", P, Q) / q_bar
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_lift_queries_matches_lift_query():
    Q = np.array([[0.5, -0.5], [1.0, 1.0]])
    rows = lift_queries(Q, 2.0)
    assert np.allclose(rows[1], lift_query(Q[1], 2.0))


# ---------------------------------------------------------------------------
# ANN parameters
# ---------------------------------------------------------------------------

def test_ann_params_example():
    ann = ann_params(MipsSpec(c=0.5, r=0.8, eps=0.0, q_bar=2.0, delta=0.5))
    assert ann.c_prime == pytest.approx(1.1547, abs=1e-4)
    assert ann.r_prime == pytest.approx(np.sqrt(1.2))
    assert ann.rho_q == pytest.approx(15.0 / 16.0)


def test_ann_params_exact_search_has_unit_c_prime():
    ann = ann_params(MipsSpec(c=1.0, r=0.5, eps=0.0, q_bar=1.0, delta=0.5))
    assert ann.c_prime == pytest.approx(1.0)


def test_ann_params_rejects_r_at_q_bar():
    with pytest.raises(ValueError, match="must be below q_bar"):
        ann_params(MipsSpec(c=0.5, r=2.0, eps=0.0, q_bar=2.0, delta=0.5))


def test_vacuous_spec():
    assert MipsSpec(c=0.5, r=0.95, eps=0.1, q_bar=1.0, delta=0.5).is_vacuous
    spec = MipsSpec(c=0.5, r=0.6, eps=0.1, q_bar=1.0, delta=0.5)
    assert not spec.is_vacuous
    assert spec.sanity_threshold == pytest.approx(0.2)


# ---------------------------------------------------------------------------
# Brute force
# ---------------------------------------------------------------------------

def test_brute_force_mips_example():
    ps = PointSet([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    assert brute_force_mips(ps, [0.0, 1.0]) == (1, pytest.approx(1.0))


def test_brute_force_mips_ties_go_to_smallest_id():
    ps = PointSet([[0.5, 0.0], [0.5, 0.0]], ids=[9, 4])
    assert brute_force_mips(ps, [1.0, 0.0])[0] == 4


def test_brute_force_mips_rejects_wrong_shape():
    with pytest.raises(ValueError):
        brute_force_mips(PointSet([[0.5, 0.0]]), [1.0, 0.0, 0.0])


def test_lift_point_three_four_five():
    lifted = lift_point([0.6, 0.0])
    assert np.allclose(lifted, [0.6, 0.0, 0.8, 0.0])
    assert np.linalg.norm(lifted) == pytest.approx(1.0)


def test_brute_force_mips_zero_query_picks_smallest_id():
    ps = PointSet([[0.3, 0.1], [0.5, 0.2]], ids=[4, 2])
    assert brute_force_mips(ps, [0.0, 0.0]) == (2, 0.0)


def test_brute_force_mips_matches_loop():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((100, 8))
    ps = PointSet(X / np.linalg.norm(X, axis=1, keepdims=True))
    for q in rng.standard_normal((50, 8)):
        best_id, best_value = None, -np.inf
        for i in ps.ids:
            value = float(ps.vector(i) @ q)
            if value > best_value:
                best_id, best_value = int(i), value
        assert brute_force_mips(ps, q) == (best_id, pytest.approx(best_value))
