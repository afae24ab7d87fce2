"""
MIPS contract and the MIPS -> ANN reduction.

(c, r, eps, q_bar)-MIPS: if some p has <q, p> >= r + eps, return any p with
<q, p> >= c r - eps. Padding points to [p; sqrt(1 - |p|^2); 0] and queries to
[q / q_bar; 0; sqrt(1 - |q / q_bar|^2)] makes both unit-norm with
|p' - q'|^2 = 2 - 2 <p, q> / q_bar, so the problem becomes (c', r')-ANN.
"""
from __future__ import annotations
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

POINT_TOLERANCE = 1e-12
QUERY_TOLERANCE = 1e-12


class MipsSpec(BaseModel):
    """Parameters (c, r, eps, q_bar, delta) of an approximate-MIPS contract."""
    model_config = ConfigDict(frozen=True)

    c: float = Field(gt=0.0, le=1.0)
    r: float
    eps: float = Field(ge=0.0)
    q_bar: float = Field(gt=0.0)
    delta: float = Field(gt=0.0, lt=1.0, description="Failure probability of the whole query sequence")

    @property
    def is_vacuous(self) -> bool:
        """No query of norm <= q_bar can have a qualifying p*."""
        return self.r + self.eps > self.q_bar

    @property
    def sanity_threshold(self) -> float:
        """Answers must satisfy <q, p> >= c r - eps."""
        return self.c * self.r - self.eps


class AnnSpec(BaseModel):
    """(c', r')-ANN parameters on lifted unit vectors."""
    model_config = ConfigDict(frozen=True)

    c_prime: float = Field(ge=1.0)
    r_prime: float = Field(gt=0.0)
    rho_q: float = Field(description="Reported query exponent (2c'^2 - 1) / c'^4")

    @property
    def radius(self) -> float:
        """Acceptance radius c' r' of the ANN contract."""
        return self.c_prime * self.r_prime


def lift_point(p) -> np.ndarray:
    """[p; sqrt(1 - |p|^2); 0], unit-norm in d + 2 dimensions."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    sq = float(p @ p)
    if not math.isfinite(sq) or math.sqrt(sq) > 1.0 + POINT_TOLERANCE:
        raise ValueError(f"point norm {math.sqrt(sq) if math.isfinite(sq) else sq} exceeds 1")
    return np.concatenate([p, [math.sqrt(max(0.0, 1.0 - sq)), 0.0]])


def lift_points(points: np.ndarray) -> np.ndarray:
    """Row-wise lift_point for a (K, d) matrix."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    sq = np.einsum("ij,ij->i", points, points)
    if np.any(np.sqrt(sq) > 1.0 + POINT_TOLERANCE):
        raise ValueError(f"point norm {np.sqrt(sq.max()):.15g} exceeds 1")
    tail = np.sqrt(np.maximum(0.0, 1.0 - sq))
    lifted = np.hstack([points, tail[:, None], np.zeros((points.shape[0], 1))])
    lifted.setflags(write=False)
    return lifted


def lift_query(q, q_bar: float) -> np.ndarray:
    """[q / q_bar; 0; sqrt(1 - |q / q_bar|^2)], unit-norm in d + 2 dimensions."""
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q_bar <= 0:
        raise ValueError(f"q_bar must be positive, got {q_bar}")
    scaled = q / q_bar
    sq = float(scaled @ scaled)
    if not math.isfinite(sq):
        raise ValueError("query has non-finite components")
    if math.sqrt(sq) > 1.0 + QUERY_TOLERANCE:
        raise ValueError(f"query norm {np.linalg.norm(q):.6g} exceeds q_bar={q_bar:.6g}")
    return np.concatenate([scaled, [0.0, math.sqrt(max(0.0, 1.0 - sq))]])


def lift_queries(queries: np.ndarray, q_bar: float) -> np.ndarray:
    """Row-wise lift_query for an (n, d) matrix."""
    if q_bar <= 0:
        raise ValueError(f"q_bar must be positive, got {q_bar}")
    scaled = np.atleast_2d(np.asarray(queries, dtype=np.float64)) / q_bar
    sq = np.einsum("ij,ij->i", scaled, scaled)
    if np.any(np.sqrt(sq) > 1.0 + QUERY_TOLERANCE):
        raise ValueError(f"query norm exceeds q_bar={q_bar:.6g}")
    tail = np.sqrt(np.maximum(0.0, 1.0 - sq))
    return np.hstack([scaled, np.zeros((scaled.shape[0], 1)), tail[:, None]])


def ann_params(spec: MipsSpec) -> AnnSpec:
    """c' = sqrt((q_bar - c r) / (q_bar - r)), r' = sqrt(2 - 2 r / q_bar)."""
    if spec.r >= spec.q_bar:
        raise ValueError(f"r={spec.r} must be below q_bar={spec.q_bar}")
    if spec.c * spec.r >= spec.q_bar:
        raise ValueError(f"c*r={spec.c * spec.r} must be below q_bar={spec.q_bar}")
    if spec.is_vacuous:
        logger.debug("vacuous MIPS spec r+eps=%.6g > q_bar=%.6g", spec.r + spec.eps, spec.q_bar)

    c_prime = math.sqrt((spec.q_bar - spec.c * spec.r) / (spec.q_bar - spec.r))
    r_prime = math.sqrt(2.0 - 2.0 * spec.r / spec.q_bar)
    rho_q = (2.0 * c_prime**2 - 1.0) / c_prime**4
    return AnnSpec(c_prime=max(c_prime, 1.0), r_prime=r_prime, rho_q=rho_q)
