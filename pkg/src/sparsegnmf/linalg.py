"""Dense matrix kernel used by every other module.

All routines operate on 2-D float64 numpy arrays and are pure: nothing
here mutates its inputs, so callers may share matrices freely across
threads.  ``as_matrix`` is the single validation gate -- every public
entry point of the package funnels raw input through it.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_matrix",
    "matmul",
    "transpose",
    "add",
    "sub",
    "scale",
    "trace",
    "frobenius_norm",
    "spectral_norm",
]


def as_matrix(values) -> np.ndarray:
    """Coerce ``values`` to a validated 2-D float64 array.

    Accepts anything ``np.asarray`` understands (nested lists, arrays).
    Rejects empty shapes, non-2-D input and non-finite entries; the
    result is C-contiguous and safe to hand to any routine below.
    """
    m = np.ascontiguousarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise ValueError(f"matrix dimensions must be positive, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries (nan or inf)")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product ``a @ b`` with an explicit conformability check."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            "inner dimensions differ"
        )
    return a @ b


def transpose(m: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(m.T)


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b, "add")
    return a + b


def sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b, "subtract")
    return a - b


def scale(m: np.ndarray, s: float) -> np.ndarray:
    return m * float(s)


def trace(m: np.ndarray) -> float:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"trace requires a square matrix, got {m.shape}")
    return float(np.trace(m))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def spectral_norm(m: np.ndarray, tol: float = 1e-9, max_iter: int = 1000) -> float:
    """Largest singular value of ``m`` by power iteration on ``m.T @ m``.

    The iteration starts from the normalised all-ones vector so repeated
    calls are bit-identical.  That start vector can sit exactly in the
    null space of ``m.T @ m`` (graph Laplacians annihilate the constant
    vector); when the image vanishes we restart once from a fixed-seed
    random direction, which keeps the routine deterministic.

    Args:
        m: matrix whose operator 2-norm is wanted.
        tol: relative change in the eigenvalue estimate that counts as
            converged.
        max_iter: iteration cap; the current estimate is returned if the
            cap is reached.

    Returns:
        Nonnegative float, ``max ||m v|| / ||v||``.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be a positive integer, got {max_iter}")
    m = as_matrix(m)
    b = m.T @ m
    n = b.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam_prev = 0.0
    lam = 0.0
    restarted = False
    for _ in range(max_iter):
        w = b @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            if restarted:
                return 0.0
            # The start vector was annihilated; pick a generic direction.
            v = np.random.default_rng(0).standard_normal(n)
            v /= np.linalg.norm(v)
            restarted = True
            lam_prev = 0.0
            continue
        v = w / lam
        if abs(lam - lam_prev) <= tol * lam:
            break
        lam_prev = lam
    return float(np.sqrt(lam))


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"cannot {what} {a.shape} and {b.shape}: shapes differ")
