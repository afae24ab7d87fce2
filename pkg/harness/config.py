"""Experiment configuration: pydantic model loaded from TOML plus CLI overrides."""
from __future__ import annotations
from enum import Enum
from pathlib import Path
from typing import Any, Optional
import tomllib

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.bandits.confidence import EtaScheme, eta_for_horizon
from core.config import AdaptiveSettings, BanditMipsConfig, LshSettings
from core.env.simulator import InstanceKind
from core.mips.oracle import OracleBackend


class Algorithm(str, Enum):
    OFUL = "oful"
    OFUL_EXACT = "oful-exact"
    LINTS = "lints"
    LINTS_EXACT = "lints-exact"

    @property
    def accelerated(self) -> bool:
        return self in (Algorithm.OFUL, Algorithm.LINTS)

    @property
    def family(self) -> str:
        return "oful" if self in (Algorithm.OFUL, Algorithm.OFUL_EXACT) else "lints"


class RunConfig(BaseModel):
    """One experiment: algorithm x instance x horizon, repeated over seeds."""
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    algorithm: Algorithm = Algorithm.OFUL
    K: int = Field(default=1000, ge=2, description="Number of arms")
    d: int = Field(default=8, ge=1, description="Feature dimension")
    T: int = Field(default=1000, ge=1, description="Horizon")
    eta: Optional[float] = Field(default=None, gt=0.0, lt=1.0, description="Accuracy; None = eta_scheme(T)")
    eta_scheme: EtaScheme = EtaScheme.SQRT
    delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    oracle: OracleBackend = OracleBackend.BRUTE
    instance: InstanceKind = InstanceKind.SPHERE_UNIFORM
    seed: int = 0
    reps: int = Field(default=1, ge=1)
    out: Optional[Path] = None

    noise_std: float = Field(default=0.5, ge=0.0, le=1.0)
    gap: float = Field(default=0.3, gt=0.0, le=2.0)
    clusters: int = Field(default=8, ge=1)
    oracle_fail: float = Field(default=0.5, gt=0.0, lt=1.0)
    max_oracles: Optional[int] = Field(default=None, ge=1)
    max_tables: Optional[int] = Field(default=512, ge=1)
    workers: int = Field(default=1, ge=1, description="Processes for parallel repetitions")
    record_timing: bool = True
    check_invariants: bool = True

    @model_validator(mode="after")
    def _eta_resolvable(self) -> "RunConfig":
        if self.algorithm.accelerated and self.resolved_eta >= 1.0:
            raise ValueError("accelerated algorithms need eta in (0, 1)")
        return self

    @property
    def resolved_eta(self) -> float:
        """eta used by accelerated runs and the bound's eta T term."""
        return self.eta if self.eta is not None else eta_for_horizon(self.T, self.eta_scheme)

    @property
    def bound_eta(self) -> float:
        return self.resolved_eta if self.algorithm.accelerated else 0.0

    def library_config(self) -> BanditMipsConfig:
        """BANDIT_MIPS_* environment settings, overridden by fields set on this run."""
        base = BanditMipsConfig.from_env()
        explicit = self.model_fields_set

        def pick(name: str, fallback: Any) -> Any:
            return getattr(self, name) if name in explicit else fallback

        return BanditMipsConfig(
            ridge=base.ridge,
            lsh=LshSettings(
                max_tables=pick("max_tables", base.lsh.max_tables),
                max_hashes=base.lsh.max_hashes,
            ),
            adaptive=AdaptiveSettings(
                oracle_fail=pick("oracle_fail", base.adaptive.oracle_fail),
                max_oracles=pick("max_oracles", base.adaptive.max_oracles),
                workers=base.adaptive.workers,
            ),
            ts=base.ts,
        )


def load_run_config(path: Optional[str | Path] = None, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """TOML file (flat keys, or a [run] table) merged with non-None overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        data.update(raw.get("run", raw))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return RunConfig.model_validate(data)
