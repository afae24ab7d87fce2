"""
Regularized least-squares state shared by the bandit policies.

Maintains V_t = I + sum x_s x_s^T, its inverse (Sherman-Morrison rank-1
updates with a periodic full re-inversion), the X^T Y accumulator and the
estimate theta_hat = V_t^{-1} X^T Y. Also tracks the running elliptical
potential sum ||x_t||^2_{V_t^{-1}}, measured before each update.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-9


def _as_finite_vector(x, dim: int, name: str = "x") -> np.ndarray:
    vec = np.asarray(x, dtype=np.float64).reshape(-1)
    if vec.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} has non-finite components: {vec}")
    return vec


@dataclass
class RidgeState:
    """Running regularized least-squares estimator (single writer)."""
    dim: int
    gram: np.ndarray
    gram_inv: np.ndarray
    xty: np.ndarray
    theta_hat: np.ndarray
    step: int = 0
    potential: float = 0.0
    refactor_every: int = 1024
    _inv_sqrt_cache: Optional[tuple[int, np.ndarray]] = field(default=None, repr=False)

    @classmethod
    def fresh(cls, dim: int, refactor_every: int = 1024) -> "RidgeState":
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        return cls(
            dim=dim,
            gram=np.eye(dim),
            gram_inv=np.eye(dim),
            xty=np.zeros(dim),
            theta_hat=np.zeros(dim),
            refactor_every=refactor_every,
        )

    @classmethod
    def fit(cls, X, y, refactor_every: int = 1024) -> "RidgeState":
        """Batch construction from an observation matrix (rows x_s, rewards y_s).

        The elliptical potential is not defined for a batch and is left at 0.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("observations contain non-finite values")
        dim = X.shape[1]
        gram = np.eye(dim) + X.T @ X
        gram_inv = np.linalg.inv(gram)
        gram_inv = 0.5 * (gram_inv + gram_inv.T)
        xty = X.T @ y
        return cls(
            dim=dim,
            gram=gram,
            gram_inv=gram_inv,
            xty=xty,
            theta_hat=gram_inv @ xty,
            step=X.shape[0],
            refactor_every=refactor_every,
        )

    def update(self, x, reward: float) -> "RidgeState":
        """Absorb one observation (x, reward) and return the updated state."""
        x = _as_finite_vector(x, self.dim)
        if not np.isfinite(reward):
            raise ValueError(f"reward must be finite, got {reward}")
        if np.linalg.norm(x) > 1.0 + NORM_TOLERANCE:
            raise ValueError(f"feature norm {np.linalg.norm(x):.6g} exceeds 1")

        z = self.gram_inv @ x
        width_sq = float(x @ z)
        self.potential += width_sq

        self.gram = self.gram + np.outer(x, x)
        self.xty = self.xty + float(reward) * x
        self.step += 1

        if self.refactor_every > 0 and self.step % self.refactor_every == 0:
            inv = np.linalg.inv(self.gram)
            self.gram_inv = 0.5 * (inv + inv.T)
            logger.debug("ridge refactorization step=%d", self.step)
        else:
            self.gram_inv = self.gram_inv - np.outer(z, z) / (1.0 + width_sq)

        self.theta_hat = self.gram_inv @ self.xty
        self._inv_sqrt_cache = None
        return self

    def inv_sqrt(self) -> np.ndarray:
        """Symmetric square root of V^{-1} via eigendecomposition of V."""
        if self._inv_sqrt_cache is not None and self._inv_sqrt_cache[0] == self.step:
            return self._inv_sqrt_cache[1]
        if not np.all(np.isfinite(self.gram)):
            raise ValueError("gram matrix has non-finite entries")
        try:
            eigvals, eigvecs = np.linalg.eigh(self.gram)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"eigendecomposition failed at step {self.step}: {exc}") from exc
        if not np.all(np.isfinite(eigvals)) or eigvals.min() <= 0:
            raise ValueError(f"gram is not positive definite (min eigenvalue {eigvals.min()})")
        root = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
        root = 0.5 * (root + root.T)
        self._inv_sqrt_cache = (self.step, root)
        return root

    def mahalanobis_inv(self, x) -> float:
        """||x||_{V^{-1}} = sqrt(x^T V^{-1} x)."""
        x = _as_finite_vector(x, self.dim)
        return float(np.sqrt(max(float(x @ self.gram_inv @ x), 0.0)))

    def widths(self, X: np.ndarray) -> np.ndarray:
        """Row-wise ||x_a||_{V^{-1}} for an arm matrix."""
        quad = np.einsum("ij,jk,ik->i", X, self.gram_inv, X)
        return np.sqrt(np.maximum(quad, 0.0))

    @staticmethod
    def potential_bound(dim: int, horizon: int) -> float:
        """Elliptical potential ceiling 2 d log(1 + T / d)."""
        return 2.0 * dim * np.log1p(horizon / dim)
