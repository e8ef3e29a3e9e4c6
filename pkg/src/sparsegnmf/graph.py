"""Sample-affinity graphs and their Laplacians.

Samples are the *columns* of the data matrix.  A graph is built either
by k-nearest-neighbour search over those columns or from a caller
supplied adjacency matrix, and is stored with its degree matrix,
combinatorial Laplacian ``L = D - A`` and the (expensive) spectral norm
of ``L`` precomputed, since solvers query that norm every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, spectral_norm

__all__ = [
    "WeightScheme",
    "GraphModel",
    "build_knn_graph",
    "from_adjacency",
    "laplacian_quadratic",
]

_SCHEME_KINDS = ("zero-one", "gaussian", "dot-product")


@dataclass(frozen=True)
class WeightScheme:
    """How to weight an edge between two connected samples.

    ``zero-one`` puts weight 1 on every edge, ``gaussian`` uses the heat
    kernel ``exp(-||xi - xj||^2 / (2 sigma^2))``, ``dot-product`` uses
    ``xi . xj``.  For the gaussian scheme, ``sigma=None`` defers to the
    median distance among connected pairs of the graph being built.
    The gaussian scheme is the package default.
    """

    kind: str = "gaussian"
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in _SCHEME_KINDS:
            raise ValueError(f"unknown weight scheme {self.kind!r}, expected one of {_SCHEME_KINDS}")
        if self.sigma is not None:
            if self.kind != "gaussian":
                raise ValueError(f"sigma only applies to the gaussian scheme, not {self.kind!r}")
            if not self.sigma > 0.0:
                raise ValueError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def zero_one(cls) -> "WeightScheme":
        return cls("zero-one")

    @classmethod
    def gaussian(cls, sigma: float | None = None) -> "WeightScheme":
        return cls("gaussian", sigma)

    @classmethod
    def dot_product(cls) -> "WeightScheme":
        return cls("dot-product")


@dataclass(frozen=True)
class GraphModel:
    """A weighted undirected graph over the samples.

    Invariants (enforced at construction): ``adjacency`` is square,
    exactly symmetric, nonnegative off the diagonal and zero on it;
    ``degree`` is the diagonal matrix of its row sums; ``laplacian`` is
    ``degree - adjacency``.  ``laplacian_norm`` caches the spectral norm
    of the Laplacian because step-size computations need it repeatedly.

    ``neighbors`` records the k used by the nearest-neighbour builder
    and is ``None`` for graphs constructed from a supplied adjacency.
    """

    adjacency: np.ndarray
    degree: np.ndarray = field(repr=False)
    laplacian: np.ndarray = field(repr=False)
    laplacian_norm: float
    scheme: WeightScheme | None = None
    neighbors: int | None = None

    @property
    def n_samples(self) -> int:
        return self.adjacency.shape[0]


def _assemble(adjacency: np.ndarray, scheme=None, neighbors=None) -> GraphModel:
    degree = np.diag(adjacency.sum(axis=1))
    laplacian = degree - adjacency
    return GraphModel(
        adjacency=adjacency,
        degree=degree,
        laplacian=laplacian,
        laplacian_norm=spectral_norm(laplacian),
        scheme=scheme,
        neighbors=neighbors,
    )


def build_knn_graph(x: np.ndarray, neighbors: int, scheme: WeightScheme | None = None) -> GraphModel:
    """Connect every column of ``x`` to its ``neighbors`` nearest columns.

    Nearness is Euclidean distance between columns; each sample
    contributes directed edges to its k nearest others, and the result
    is symmetrised with ``a[j, l] = max(a[j, l], a[l, j])`` so mutual
    and one-sided neighbourships end up with the same weight.  Distance
    ties are broken toward the lower column index.

    Args:
        x: data matrix, features x samples.
        neighbors: k, with ``1 <= k < number of samples``.
        scheme: edge weighting; defaults to the gaussian kernel with the
            median-distance bandwidth.

    Returns:
        The assembled GraphModel.
    """
    x = as_matrix(x)
    n = x.shape[1]
    if not 1 <= neighbors < n:
        raise ValueError(f"neighbors={neighbors} must satisfy 1 <= neighbors < n_samples={n}")
    if scheme is None:
        scheme = WeightScheme.gaussian()

    gram = x.T @ x
    sq_norms = np.diag(gram)
    # Squared distances via the Gram matrix; clip tiny negatives from
    # cancellation so sqrt stays real.
    d2 = np.maximum(sq_norms[:, None] + sq_norms[None, :] - 2.0 * gram, 0.0)
    np.fill_diagonal(d2, np.inf)  # a sample is never its own neighbour

    connected = np.zeros((n, n), dtype=bool)
    for j in range(n):
        nearest = np.argsort(d2[j], kind="stable")[:neighbors]
        connected[j, nearest] = True
    connected |= connected.T  # union of the directed edge sets

    if scheme.kind == "zero-one":
        weights = np.ones((n, n))
    elif scheme.kind == "gaussian":
        sigma = scheme.sigma
        if sigma is None:
            iu, ju = np.triu_indices(n, k=1)
            pair_mask = connected[iu, ju]
            sigma = float(np.median(np.sqrt(d2[iu, ju][pair_mask])))
            if sigma <= 0.0:
                sigma = 1.0  # all connected pairs coincide; any width works
        weights = np.exp(-d2 / (2.0 * sigma * sigma))
        np.fill_diagonal(weights, 0.0)  # overwrite exp(-inf) explicitly
    else:  # dot-product
        weights = gram.copy()

    adjacency = np.where(connected, weights, 0.0)
    adjacency = np.maximum(adjacency, adjacency.T)
    np.fill_diagonal(adjacency, 0.0)
    return _assemble(adjacency, scheme=scheme, neighbors=neighbors)


def from_adjacency(a: np.ndarray) -> GraphModel:
    """Wrap a caller-supplied adjacency matrix as a GraphModel.

    The matrix must be square, symmetric within 1e-12 and have an
    exactly zero diagonal; symmetry is then made exact by averaging
    with the transpose.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"adjacency must be square, got {a.shape}")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > 1e-12:
        raise ValueError(f"adjacency is not symmetric: max |a - a.T| = {asym:.3e}")
    if np.any(np.diag(a) != 0.0):
        raise ValueError("adjacency must have a zero diagonal (no self loops)")
    a = (a + a.T) / 2.0
    return _assemble(a)


def laplacian_quadratic(h: np.ndarray, graph: GraphModel) -> float:
    """Smoothness penalty ``trace(H L H^T)`` of row-space embedding ``h``.

    Equals half the adjacency-weighted sum of squared column
    differences, so it is zero exactly when connected samples share
    identical columns of ``h``.
    """
    if h.shape[1] != graph.n_samples:
        raise ValueError(
            f"embedding has {h.shape[1]} columns but the graph has {graph.n_samples} samples"
        )
    return float(np.sum((h @ graph.laplacian) * h))
