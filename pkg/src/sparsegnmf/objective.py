"""Smooth objective, partial gradients and block Lipschitz constants.

The model factorizes a nonnegative data matrix ``x`` (features x
samples) as ``w @ h`` while pulling the columns of ``h`` together along
a sample-affinity graph:

    F(w, h) = 0.5 * ||x - w h||_F^2 + lam * trace(h L h^T)

subject to ``w >= 0`` with at most ``sparsity_k`` nonzero rows and
``h >= 0``.  The constraints live in the prox module; this module only
knows the smooth part and its curvature bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphModel, laplacian_quadratic
from .linalg import as_matrix, spectral_norm

__all__ = [
    "ProblemSpec",
    "smooth_objective",
    "grad_w",
    "grad_h",
    "lipschitz_w",
    "lipschitz_h",
    "LIPSCHITZ_FLOOR",
]

# Lower clamp for both Lipschitz constants so step sizes 1/c stay finite
# even for degenerate all-zero factors.
LIPSCHITZ_FLOOR = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """One factorization problem: data, sizes, regularization, graph.

    Attributes:
        x: nonnegative data matrix, features x samples.
        rank: inner dimension of the factorization.
        sparsity_k: row budget on the basis matrix, in ``[1, p]``.
        lam: graph-regularization weight, ``>= 0``.
        graph: affinity graph over the samples (columns of ``x``).
    """

    x: np.ndarray
    rank: int
    sparsity_k: int
    lam: float
    graph: GraphModel

    def __post_init__(self):
        x = as_matrix(self.x)
        object.__setattr__(self, "x", x)
        p, n = x.shape
        if np.min(x) < 0.0:
            raise ValueError("data matrix must be nonnegative")
        if not 1 <= self.rank <= min(p, n):
            raise ValueError(f"rank={self.rank} must lie in [1, min(p, n)={min(p, n)}]")
        if not 1 <= self.sparsity_k <= p:
            raise ValueError(f"sparsity_k={self.sparsity_k} must lie in [1, p={p}]")
        if not self.lam >= 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.graph.n_samples != n:
            raise ValueError(
                f"graph covers {self.graph.n_samples} samples but the data has {n} columns"
            )

    @property
    def n_features(self) -> int:
        return self.x.shape[0]

    @property
    def n_samples(self) -> int:
        return self.x.shape[1]


def _check_factor_shapes(w: np.ndarray, h: np.ndarray, spec: ProblemSpec) -> None:
    p, n = spec.x.shape
    r = spec.rank
    if w.shape != (p, r):
        raise ValueError(f"basis factor must be {p}x{r}, got {w.shape}")
    if h.shape != (r, n):
        raise ValueError(f"coefficient factor must be {r}x{n}, got {h.shape}")


def smooth_objective(w: np.ndarray, h: np.ndarray, spec: ProblemSpec) -> float:
    """Evaluate ``0.5 ||x - w h||_F^2 + lam * trace(h L h^T)``."""
    _check_factor_shapes(w, h, spec)
    residual = spec.x - w @ h
    value = 0.5 * float(np.sum(residual * residual))
    if spec.lam != 0.0:
        value += spec.lam * laplacian_quadratic(h, spec.graph)
    return value


def grad_w(w: np.ndarray, h: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    """Partial gradient in the basis factor: ``w (h h^T) - x h^T``."""
    _check_factor_shapes(w, h, spec)
    return w @ (h @ h.T) - spec.x @ h.T


def grad_h(w: np.ndarray, h: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    """Partial gradient in the coefficients: ``w^T w h - w^T x + 2 lam h L``."""
    _check_factor_shapes(w, h, spec)
    g = (w.T @ w) @ h - w.T @ spec.x
    if spec.lam != 0.0:
        g = g + 2.0 * spec.lam * (h @ spec.graph.laplacian)
    return g


def lipschitz_w(h: np.ndarray) -> float:
    """Curvature bound for the basis block: ``||h h^T||_2``, floored."""
    return max(spectral_norm(h @ h.T), LIPSCHITZ_FLOOR)


def lipschitz_h(w: np.ndarray, spec: ProblemSpec) -> float:
    """Curvature bound for the coefficient block.

    ``||w^T w||_2 + 2 lam ||L||_2``; the Laplacian norm is read off the
    graph's cache rather than recomputed.  Floored like lipschitz_w.
    """
    value = spectral_norm(w.T @ w) + 2.0 * spec.lam * spec.graph.laplacian_norm
    return max(value, LIPSCHITZ_FLOOR)
