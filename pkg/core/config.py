"""Dataclass-based library configuration.

Every tunable that is not part of an experiment description lives here as a
frozen dataclass with defaults that reproduce the usual parameter choices,
overridable from environment variables.

Experiment-level knobs (K, d, T, eta, delta, ...) belong to
``harness.config.RunConfig`` instead.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# Nested config sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RidgeSettings:
    """Regularized least-squares maintenance."""

    refactor_every: int = 1024  # steps between full re-inversions


@dataclass(frozen=True)
class LshSettings:
    """Hyperplane LSH table sizing."""

    max_tables: int | None = 512  # None = use the (k, L) formula uncapped
    max_hashes: int = 32


@dataclass(frozen=True)
class AdaptiveSettings:
    """Amplification of a constant-success oracle."""

    oracle_fail: float = 0.5  # per-oracle failure probability
    max_oracles: int | None = None  # None = exact kappa
    workers: int = 1  # threads used to build the oracle copies


@dataclass(frozen=True)
class TsConstants:
    """Anti-concentration / concentration constants of the Gaussian perturbation."""

    p: float = 0.15
    b: float = 4.0
    b_prime: float = 4.0


# ---------------------------------------------------------------------------
# Top-level config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BanditMipsConfig:
    """Complete library configuration.

    Usage::

        config = BanditMipsConfig.default()
        state = RidgeState.fresh(d, refactor_every=config.ridge.refactor_every)
    """

    ridge: RidgeSettings = field(default_factory=RidgeSettings)
    lsh: LshSettings = field(default_factory=LshSettings)
    adaptive: AdaptiveSettings = field(default_factory=AdaptiveSettings)
    ts: TsConstants = field(default_factory=TsConstants)

    @classmethod
    def default(cls) -> "BanditMipsConfig":
        """Create config with all defaults."""
        return cls()

    @classmethod
    def from_env(cls, prefix: str = "BANDIT_MIPS_") -> "BanditMipsConfig":
        """Create config from environment variables.

        Example: BANDIT_MIPS_ORACLE_FAIL=0.25 BANDIT_MIPS_MAX_TABLES=128
        """
        base = cls()

        refactor = os.getenv(f"{prefix}REFACTOR_EVERY")
        ridge = RidgeSettings(refactor_every=int(refactor)) if refactor else base.ridge

        max_tables = os.getenv(f"{prefix}MAX_TABLES")
        lsh = base.lsh
        if max_tables:
            lsh = LshSettings(
                max_tables=None if max_tables.lower() == "none" else int(max_tables),
                max_hashes=base.lsh.max_hashes,
            )

        oracle_fail = os.getenv(f"{prefix}ORACLE_FAIL")
        max_oracles = os.getenv(f"{prefix}MAX_ORACLES")
        workers = os.getenv(f"{prefix}WORKERS")
        adaptive = AdaptiveSettings(
            oracle_fail=float(oracle_fail) if oracle_fail else base.adaptive.oracle_fail,
            max_oracles=int(max_oracles) if max_oracles else base.adaptive.max_oracles,
            workers=int(workers) if workers else base.adaptive.workers,
        )

        return cls(ridge=ridge, lsh=lsh, adaptive=adaptive, ts=base.ts)
