"""Projection tests, centered on the exhaustive row-support oracle."""

from itertools import combinations

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from sparsegnmf.prox import project_nonneg, project_row_sparse


def enumerate_projection(m, k):
    """Brute-force projection onto {W >= 0, at most k nonzero rows}.

    For every k-subset of rows, the best feasible point keeps the
    clipped rows on the subset and zeros elsewhere; pick the subset of
    least squared distance.  Returns (best_matrix, best_cost, unique)
    where unique means no other support ties within 1e-12.
    """
    p = m.shape[0]
    clipped = np.maximum(m, 0.0)
    best_cost, best_support = None, None
    costs = []
    for support in combinations(range(p), k):
        w = np.zeros_like(m)
        w[list(support)] = clipped[list(support)]
        cost = float(np.sum((w - m) ** 2))
        costs.append(cost)
        if best_cost is None or cost < best_cost:
            best_cost, best_support = cost, support
    ties = sum(1 for c in costs if c <= best_cost + 1e-12)
    w = np.zeros_like(m)
    w[list(best_support)] = clipped[list(best_support)]
    return w, best_cost, ties == 1


class TestProjectNonneg:
    def test_nonneg_fixed_point(self):
        m = np.array([[0.5, 2.0], [0.0, 1.0]])
        assert_array_equal(project_nonneg(m), m)

    def test_clipping(self):
        assert_array_equal(
            project_nonneg(np.array([[-1.0, 2.0], [0.0, -3.0]])), [[0.0, 2.0], [0.0, 0.0]]
        )

    def test_entrywise_argmin(self):
        # Projection onto a separable set: each entry independently
        # clipped is the closest feasible value.
        rng = np.random.default_rng(0)
        m = rng.standard_normal((5, 4))
        proj = project_nonneg(m)
        for i in range(5):
            for j in range(4):
                assert proj[i, j] == max(0.0, m[i, j])

    def test_non_expansive(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.standard_normal((4, 3))
            b = rng.standard_normal((4, 3))
            lhs = np.linalg.norm(project_nonneg(a) - project_nonneg(b))
            assert lhs <= np.linalg.norm(a - b) + 1e-12


class TestProjectRowSparse:
    def test_budget_equals_rows_reduces_to_clip(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((4, 3))
        out, sel = project_row_sparse(m, 4)
        assert_array_equal(out, project_nonneg(m))
        assert sel.kept_rows == (0, 1, 2, 3)

    def test_dominant_row_survives(self):
        m = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
        out, sel = project_row_sparse(m, 1)
        assert sel.kept_rows == (0,)
        assert_array_equal(out, [[3.0, 4.0], [0.0, 0.0], [0.0, 0.0]])

    def test_k_out_of_range(self):
        with pytest.raises(ValueError, match="budget"):
            project_row_sparse(np.ones((3, 2)), 0)
        with pytest.raises(ValueError, match="budget"):
            project_row_sparse(np.ones((3, 2)), 4)

    def test_ties_keep_lowest_index(self):
        m = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])  # equal norms
        _, sel = project_row_sparse(m, 2)
        assert sel.kept_rows == (0, 1)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            m = rng.standard_normal((6, 4))
            once, _ = project_row_sparse(m, 3)
            twice, _ = project_row_sparse(once, 3)
            assert_array_equal(once, twice)

    def test_feasibility_always(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            m = rng.standard_normal((7, 3)) * rng.uniform(0.1, 10)
            k = int(rng.integers(1, 8))
            out, _ = project_row_sparse(m, k)
            assert out.min() >= 0.0
            assert int(np.sum(np.any(out != 0.0, axis=1))) <= k

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(100):
            m = rng.standard_normal((5, 3))
            for k in range(1, 6):
                expected, _, unique = enumerate_projection(m, k)
                if not unique:
                    continue
                out, _ = project_row_sparse(m, k)
                assert np.max(np.abs(out - expected)) <= 1e-12
                checked += 1
        assert checked > 300  # ties are rare for continuous draws

    def test_selection_reports_clipped_norms(self):
        m = np.array([[-1.0, 0.0], [3.0, 4.0]])
        _, sel = project_row_sparse(m, 1)
        assert_array_equal(sel.row_norms, [0.0, 5.0])
        assert sel.kept_rows == (1,)
