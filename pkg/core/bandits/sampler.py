"""Gaussian perturbation distribution for linear Thompson sampling."""
from __future__ import annotations
from typing import Optional
import math

import numpy as np
from scipy import stats

from ..config import TsConstants


class TsSampler:
    """xi ~ N(0, I_d) with the anti-concentration / concentration constants (p, b, b')."""

    def __init__(
        self,
        dim: int,
        seed: int | np.random.SeedSequence | np.random.Generator | None = None,
        constants: Optional[TsConstants] = None,
    ):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self.constants = constants or TsConstants()
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def sample(self) -> np.ndarray:
        return self.rng.standard_normal(self.dim)

    def sample_many(self, n: int) -> np.ndarray:
        return self.rng.standard_normal((n, self.dim))

    def concentration_radius(self, delta: float) -> float:
        """sqrt(b d ln(b' d / delta)); |xi| stays below it with probability >= 1 - delta."""
        c = self.constants
        return math.sqrt(c.b * self.dim * math.log(c.b_prime * self.dim / delta))

    @staticmethod
    def anti_concentration() -> float:
        """P(u^T xi >= 1) for any unit u."""
        return float(stats.norm.sf(1.0))


def sample_perturbation(sampler: TsSampler) -> np.ndarray:
    return sampler.sample()
