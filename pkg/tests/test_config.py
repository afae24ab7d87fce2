"""Test library and experiment configuration."""
import numpy as np
import pytest
from pydantic import ValidationError

from core.config import BanditMipsConfig
from core.mips import OracleBackend, PointSet
from harness.config import Algorithm, RunConfig, load_run_config
from harness.runner import make_policy


def test_library_defaults():
    config = BanditMipsConfig.default()
    assert config.adaptive.oracle_fail == 0.5
    assert config.adaptive.max_oracles is None
    assert config.lsh.max_tables == 512
    assert config.ts.p == 0.15
    assert config.ts.b == 4.0 and config.ts.b_prime == 4.0
    assert config.ridge.refactor_every == 1024


def test_library_config_from_env(monkeypatch):
    monkeypatch.setenv("BANDIT_MIPS_ORACLE_FAIL", "0.25")
    monkeypatch.setenv("BANDIT_MIPS_MAX_TABLES", "none")
    monkeypatch.setenv("BANDIT_MIPS_MAX_ORACLES", "16")
    monkeypatch.setenv("BANDIT_MIPS_REFACTOR_EVERY", "64")
    config = BanditMipsConfig.from_env()
    assert config.adaptive.oracle_fail == 0.25
    assert config.adaptive.max_oracles == 16
    assert config.lsh.max_tables is None
    assert config.ridge.refactor_every == 64


def test_library_config_is_frozen():
    config = BanditMipsConfig.default()
    with pytest.raises(Exception):
        config.ridge = None


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(K=1)
    with pytest.raises(ValidationError):
        RunConfig(T=0)
    with pytest.raises(ValidationError):
        RunConfig(eta=1.5)
    with pytest.raises(ValidationError):
        RunConfig(delta=0.0)
    with pytest.raises(ValidationError):
        RunConfig(unknown_key=1)


def test_run_config_eta():
    assert RunConfig(T=10_000).resolved_eta == pytest.approx(0.01)
    assert RunConfig(T=10_000, eta=0.2).resolved_eta == 0.2
    assert RunConfig(algorithm="oful-exact", eta=0.2).bound_eta == 0.0
    assert RunConfig(algorithm="lints", eta=0.2).bound_eta == 0.2


def test_run_config_library_mapping():
    cfg = RunConfig(oracle_fail=0.3, max_oracles=4, max_tables=64)
    config = cfg.library_config()
    assert config.adaptive.oracle_fail == 0.3
    assert config.adaptive.max_oracles == 4
    assert config.lsh.max_tables == 64


def test_algorithm_properties():
    assert Algorithm.OFUL.accelerated and not Algorithm.OFUL_EXACT.accelerated
    assert Algorithm.LINTS_EXACT.family == "lints"
    assert Algorithm.OFUL_EXACT.family == "oful"


def test_load_run_config_from_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[run]\nalgorithm = "lints"\nK = 64\nd = 4\nT = 100\noracle = "lsh"\n')
    cfg = load_run_config(path, {"T": 200, "seed": None})
    assert cfg.algorithm is Algorithm.LINTS
    assert cfg.K == 64
    assert cfg.T == 200
    assert cfg.seed == 0
    assert cfg.oracle is OracleBackend.LSH


def test_load_run_config_flat_keys(tmp_path):
    path = tmp_path / "flat.toml"
    path.write_text('algorithm = "oful-exact"\nK = 8\n')
    assert load_run_config(path).K == 8


def test_run_config_starts_from_environment(monkeypatch):
    monkeypatch.setenv("BANDIT_MIPS_REFACTOR_EVERY", "64")
    monkeypatch.setenv("BANDIT_MIPS_ORACLE_FAIL", "0.25")
    monkeypatch.setenv("BANDIT_MIPS_WORKERS", "4")
    monkeypatch.setenv("BANDIT_MIPS_MAX_TABLES", "128")
    cfg = RunConfig(algorithm="oful", K=2, d=2, T=20, eta=0.25)
    policy = make_policy(cfg, PointSet(np.eye(2)), np.random.SeedSequence(0))
    assert policy.state.ridge.refactor_every == 64
    assert policy.state.oracle_fail == 0.25
    assert policy.state.config.adaptive.workers == 4
    assert policy.state.config.lsh.max_tables == 128


def test_explicit_run_fields_override_environment(monkeypatch):
    monkeypatch.setenv("BANDIT_MIPS_ORACLE_FAIL", "0.25")
    monkeypatch.setenv("BANDIT_MIPS_MAX_TABLES", "128")
    config = RunConfig(oracle_fail=0.4, max_tables=None).library_config()
    assert config.adaptive.oracle_fail == 0.4
    assert config.lsh.max_tables is None
    assert RunConfig().library_config().lsh.max_tables == 128
