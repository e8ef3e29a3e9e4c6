"""Projections used as proximal operators by the solvers.

Both maps are Euclidean projections.  ``project_nonneg`` handles the
nonnegativity constraint on the coefficient matrix; ``project_row_sparse``
additionally enforces a row-support budget on the basis matrix: at most
``k`` rows may be nonzero, and the survivors are the clipped rows of
largest Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["project_nonneg", "project_row_sparse", "RowSelection"]


@dataclass(frozen=True)
class RowSelection:
    """Which rows survived a row-sparse projection.

    Attributes:
        kept_rows: sorted indices of the rows left nonzero.
        row_norms: Euclidean norm of every row *after* clipping at zero,
            in original row order (length = number of rows).
    """

    kept_rows: tuple[int, ...]
    row_norms: np.ndarray


def project_nonneg(m: np.ndarray) -> np.ndarray:
    """Elementwise projection onto the nonnegative orthant."""
    return np.maximum(m, 0.0)


def project_row_sparse(m: np.ndarray, k: int) -> tuple[np.ndarray, RowSelection]:
    """Project onto {nonnegative matrices with at most ``k`` nonzero rows}.

    Clips negatives to zero first, then keeps the ``k`` rows of largest
    Euclidean norm and zeroes the rest.  Ties are broken toward the
    lowest row index, so the map is deterministic.

    Args:
        m: input matrix, any sign pattern.
        k: row budget, ``1 <= k <= m.shape[0]``.

    Returns:
        ``(projected, selection)`` where ``selection`` records the
        surviving row indices and the clipped row norms.
    """
    rows = m.shape[0]
    if not 1 <= k <= rows:
        raise ValueError(f"row budget k={k} must satisfy 1 <= k <= {rows}")
    clipped = np.maximum(m, 0.0)
    norms = np.linalg.norm(clipped, axis=1)
    # Stable argsort on the negated norms: equal norms keep ascending
    # index order, so the lowest indices win ties.
    order = np.argsort(-norms, kind="stable")
    keep = np.sort(order[:k])
    projected = np.zeros_like(clipped)
    projected[keep] = clipped[keep]
    return projected, RowSelection(tuple(int(i) for i in keep), norms)
