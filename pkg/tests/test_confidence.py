"""Test confidence radii, stage/level counts and regret ceilings."""
import math

import pytest

from core.bandits.confidence import (
    EtaScheme,
    beta,
    eta_for_horizon,
    gamma,
    lints_regret_bound,
    max_stage,
    num_levels,
    oful_regret_bound,
)


def test_beta_example():
    assert beta(0.5, 2, 98) == pytest.approx(4.0349, abs=1e-4)


def test_beta_rejects_bad_delta():
    with pytest.raises(ValueError):
        beta(0.0, 2, 10)
    with pytest.raises(ValueError):
        beta(1.0, 2, 10)


def test_gamma_formula():
    b = beta(0.01, 3, 100)
    assert gamma(b, 3, 0.01) == pytest.approx(b * math.sqrt(12.0 * math.log(1200.0)))


def test_max_stage():
    assert max_stage(0.25) == 2
    assert max_stage(0.1) == 4
    assert max_stage(0.6) == 1
    with pytest.raises(ValueError):
        max_stage(1.0)


def test_num_levels():
    assert num_levels(0.25) == 4
    assert num_levels(0.3) == 4
    assert num_levels(1e-6) == 1_000_000


def test_oful_bound_example():
    b = beta(0.5, 2, 98)
    assert oful_regret_bound(b, 2, 98, 0.1) == pytest.approx(2179.6, rel=1e-3)


def test_eta_term_is_additive():
    b = beta(0.5, 2, 98)
    assert oful_regret_bound(b, 2, 98, 0.1) - oful_regret_bound(b, 2, 98) == pytest.approx(40 * 0.1 * 98)
    g = gamma(b, 2, 0.5)
    diff = lints_regret_bound(b, g, 2, 98, 0.05, eta=0.1) - lints_regret_bound(b, g, 2, 98, 0.05)
    assert diff == pytest.approx(2 * (3 + g + b) / 0.15 * 0.1 * 98)


def test_eta_schedules():
    assert eta_for_horizon(10_000, EtaScheme.SQRT) == pytest.approx(0.01)
    assert eta_for_horizon(10_000, "oful-exp") == pytest.approx(10_000**-0.12)
    assert eta_for_horizon(1) == 0.5


def test_eta_schedules_only_clamp_unit_horizon():
    assert eta_for_horizon(2) == pytest.approx(2**-0.5)
    assert eta_for_horizon(100, "oful-exp") == pytest.approx(100**-0.12)
    assert 0.5 < eta_for_horizon(100, "oful-exp") < 1.0
    assert eta_for_horizon(2, "lints-exp") == pytest.approx(2**-0.24)
