"""Alternating proximal-linearized solvers for the factorization model.

Two algorithms share all of their machinery:

* ``palm`` -- at each iteration take a proximal gradient step in the
  basis factor (projection onto the nonnegative row-sparse set), then
  one in the coefficient factor (projection onto the orthant), each with
  step size ``1 / (gamma_step * block Lipschitz constant)``.
* ``acc_palm`` -- first extrapolate both factors along the previous
  displacement (momentum ``beta``), take the same two proximal steps
  from the extrapolated points, and keep the candidates only if the
  objective drops by at least ``rho0 * squared step norm``.  Accepted
  steps grow ``beta`` by ``t_factor`` (capped at ``beta_max``); rejected
  steps shrink it by the same factor and fall back to a plain step from
  the non-extrapolated iterate, so every iteration still descends.

Both stop when the joint relative change of the factor pair drops below
``epsilon`` or after ``max_iter`` iterations, whichever comes first.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .objective import (
    ProblemSpec,
    grad_h,
    grad_w,
    lipschitz_h,
    lipschitz_w,
    smooth_objective,
)
from .prox import project_nonneg, project_row_sparse

__all__ = [
    "SolverConfig",
    "SolverState",
    "TraceRecord",
    "ConvergenceTrace",
    "NonFiniteError",
    "init_factors",
    "palm_step",
    "acc_palm_step",
    "solve",
    "TRACE_CSV_COLUMNS",
]

ALGORITHMS = ("palm", "acc_palm")

# Column order of the exported per-iteration CSV; external tooling keys
# on these names, so treat the list as frozen.
TRACE_CSV_COLUMNS = ("iter", "objective", "rel_change", "beta", "accepted", "c_k", "d_k", "elapsed_s")

# Slack for the monotone-descent debug assertion; absorbs float noise in
# objective evaluation without hiding real ascent.
DESCENT_SLACK = 1e-10


class NonFiniteError(RuntimeError):
    """A gradient or objective value overflowed or produced NaN."""

    def __init__(self, iteration: int, what: str):
        super().__init__(f"non-finite {what} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    """Everything a solver run needs besides the problem itself.

    ``rho0=None`` derives the sufficient-decrease margin from the step
    sizes each iteration (``min of half the step-size surpluses``); a
    float fixes it.  ``adaptive_beta=False`` freezes the momentum at
    ``beta0`` for sweep-style experiments.
    """

    algorithm: str = "acc_palm"
    max_iter: int = 1000
    epsilon: float = 1e-3
    beta0: float = 0.5
    beta_max: float = 0.99
    t_factor: float = 1.1
    gamma_step: float = 1.01
    rho0: float | None = None
    adaptive_beta: bool = True
    seed: int = 0
    debug_checks: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.beta_max < 1.0:
            raise ValueError(f"beta_max must lie in [0, 1), got {self.beta_max}")
        if not 0.0 <= self.beta0 <= self.beta_max:
            raise ValueError(f"beta0={self.beta0} must lie in [0, beta_max={self.beta_max}]")
        if not self.t_factor > 1.0:
            raise ValueError(f"t_factor must exceed 1, got {self.t_factor}")
        if not self.gamma_step > 1.0:
            raise ValueError(f"gamma_step must exceed 1, got {self.gamma_step}")
        if self.rho0 is not None and not self.rho0 > 0.0:
            raise ValueError(f"fixed rho0 must be positive, got {self.rho0}")


@dataclass
class SolverState:
    """Current and previous factor pair plus momentum bookkeeping.

    Step functions never mutate a state they receive; they return a new
    one, so states can be kept around for inspection.
    """

    w: np.ndarray
    h: np.ndarray
    w_prev: np.ndarray
    h_prev: np.ndarray
    beta: float
    iteration: int = 0
    c_k: float = 0.0
    d_k: float = 0.0


@dataclass(frozen=True)
class TraceRecord:
    """One iteration of a solver run.

    ``beta`` is the momentum used for this iteration's extrapolation
    (always 0 for palm), ``accepted`` whether the extrapolated candidate
    survived the decrease test (palm steps count as accepted),
    ``step_norm`` the joint distance from the extrapolated point to the
    new iterate, and ``rho0`` the decrease margin in force.
    """

    iteration: int
    objective: float
    rel_change: float
    beta: float
    accepted: bool
    c_k: float
    d_k: float
    step_norm: float
    rho0: float
    elapsed_s: float


@dataclass
class ConvergenceTrace:
    """Full per-iteration history of one solver run."""

    initial_objective: float
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective if self.records else self.initial_objective

    def objectives(self) -> list[float]:
        return [r.objective for r in self.records]

    def write_csv(self, path) -> None:
        """Write the pinned eight-column per-iteration table."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_CSV_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [r.iteration, repr(r.objective), repr(r.rel_change), repr(r.beta),
                     int(r.accepted), repr(r.c_k), repr(r.d_k), repr(r.elapsed_s)]
                )

    def to_dict(self) -> dict:
        return {
            "initial_objective": self.initial_objective,
            "converged": self.converged,
            "records": [
                {
                    "iter": r.iteration,
                    "objective": r.objective,
                    "rel_change": r.rel_change,
                    "beta": r.beta,
                    "accepted": r.accepted,
                    "c_k": r.c_k,
                    "d_k": r.d_k,
                    "step_norm": r.step_norm,
                    "rho0": r.rho0,
                    "elapsed_s": r.elapsed_s,
                }
                for r in self.records
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True)
class _StepInfo:
    """Diagnostics a step function hands back alongside the new state."""

    objective: float
    step_norm: float
    rho0: float
    accepted: bool
    beta_used: float
    c_k: float
    d_k: float


def _pair_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of a stacked matrix pair."""
    return math.sqrt(float(np.sum(a * a)) + float(np.sum(b * b)))


def _ensure_finite(m: np.ndarray, iteration: int, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(iteration, what)


def _derive_rho0(config: SolverConfig, c_k: float, lw: float, d_k: float, lh: float) -> float:
    if config.rho0 is not None:
        return config.rho0
    return min(0.5 * (c_k - lw), 0.5 * (d_k - lh))


def init_factors(spec: ProblemSpec, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw a feasible random starting pair.

    Entries are uniform on ``[0, 2*sqrt(mean(x)/rank)]`` so the product
    of the two factors matches the data's mean magnitude in expectation,
    then the basis factor is projected onto its row budget.  Bitwise
    reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    p, n = spec.x.shape
    mean_x = float(np.mean(spec.x))
    scale = 2.0 * math.sqrt(mean_x / spec.rank) if mean_x > 0.0 else 1.0
    w0 = rng.random((p, spec.rank)) * scale
    h0 = rng.random((spec.rank, n)) * scale
    w0, _ = project_row_sparse(w0, spec.sparsity_k)
    return w0, h0


def palm_step(state: SolverState, spec: ProblemSpec, config: SolverConfig) -> tuple[SolverState, _StepInfo]:
    """One alternating proximal gradient iteration without momentum."""
    k = state.iteration + 1
    w, h = state.w, state.h

    lw = lipschitz_w(h)
    c_k = config.gamma_step * lw
    gw = grad_w(w, h, spec)
    _ensure_finite(gw, k, "basis gradient")
    w_new, _ = project_row_sparse(w - gw / c_k, spec.sparsity_k)

    lh = lipschitz_h(w_new, spec)
    d_k = config.gamma_step * lh
    gh = grad_h(w_new, h, spec)
    _ensure_finite(gh, k, "coefficient gradient")
    h_new = project_nonneg(h - gh / d_k)

    objective = smooth_objective(w_new, h_new, spec)
    if not math.isfinite(objective):
        raise NonFiniteError(k, "objective")
    info = _StepInfo(
        objective=objective,
        step_norm=_pair_norm(w_new - w, h_new - h),
        rho0=_derive_rho0(config, c_k, lw, d_k, lh),
        accepted=True,
        beta_used=0.0,
        c_k=c_k,
        d_k=d_k,
    )
    new_state = SolverState(
        w=w_new, h=h_new, w_prev=w, h_prev=h,
        beta=state.beta, iteration=k, c_k=c_k, d_k=d_k,
    )
    return new_state, info


def acc_palm_step(state: SolverState, spec: ProblemSpec, config: SolverConfig) -> tuple[SolverState, _StepInfo]:
    """One extrapolated iteration with the sufficient-decrease safeguard."""
    k = state.iteration + 1
    w, h = state.w, state.h
    beta = state.beta

    w_tilde = w + beta * (w - state.w_prev)
    h_tilde = h + beta * (h - state.h_prev)

    lw = lipschitz_w(h)
    c_k = config.gamma_step * lw
    gw = grad_w(w_tilde, h, spec)
    _ensure_finite(gw, k, "basis gradient")
    w_cand, _ = project_row_sparse(w_tilde - gw / c_k, spec.sparsity_k)

    lh = lipschitz_h(w_cand, spec)
    d_k = config.gamma_step * lh
    gh = grad_h(w_cand, h_tilde, spec)
    _ensure_finite(gh, k, "coefficient gradient")
    h_cand = project_nonneg(h_tilde - gh / d_k)

    rho0 = _derive_rho0(config, c_k, lw, d_k, lh)
    f_curr = smooth_objective(w, h, spec)
    f_cand = smooth_objective(w_cand, h_cand, spec)
    if not math.isfinite(f_cand):
        raise NonFiniteError(k, "objective")
    gap = _pair_norm(w_cand - w_tilde, h_cand - h_tilde)

    if f_cand <= f_curr - rho0 * gap * gap:
        w_new, h_new = w_cand, h_cand
        objective = f_cand
        step_norm = gap
        accepted = True
        new_beta = min(config.t_factor * beta, config.beta_max) if config.adaptive_beta else beta
    else:
        # Candidate rejected: redo both updates from the current iterate
        # (a plain descent step) and cool the momentum down.
        lw = lipschitz_w(h)
        c_k = config.gamma_step * lw
        gw = grad_w(w, h, spec)
        _ensure_finite(gw, k, "basis gradient")
        w_new, _ = project_row_sparse(w - gw / c_k, spec.sparsity_k)

        lh = lipschitz_h(w_new, spec)
        d_k = config.gamma_step * lh
        gh = grad_h(w_new, h, spec)
        _ensure_finite(gh, k, "coefficient gradient")
        h_new = project_nonneg(h - gh / d_k)

        rho0 = _derive_rho0(config, c_k, lw, d_k, lh)
        objective = smooth_objective(w_new, h_new, spec)
        if not math.isfinite(objective):
            raise NonFiniteError(k, "objective")
        step_norm = _pair_norm(w_new - w, h_new - h)
        accepted = False
        new_beta = beta / config.t_factor if config.adaptive_beta else beta

    info = _StepInfo(
        objective=objective,
        step_norm=step_norm,
        rho0=rho0,
        accepted=accepted,
        beta_used=beta,
        c_k=c_k,
        d_k=d_k,
    )
    new_state = SolverState(
        w=w_new, h=h_new, w_prev=w, h_prev=h,
        beta=new_beta, iteration=k, c_k=c_k, d_k=d_k,
    )
    return new_state, info


def _count_nonzero_rows(m: np.ndarray) -> int:
    return int(np.sum(np.any(m != 0.0, axis=1)))


def _debug_verify(state: SolverState, info: _StepInfo, f_prev: float, spec: ProblemSpec) -> None:
    if info.objective > f_prev + DESCENT_SLACK:
        raise AssertionError(
            f"objective rose at iteration {state.iteration}: {f_prev} -> {info.objective}"
        )
    if info.objective > f_prev - info.rho0 * info.step_norm**2 + DESCENT_SLACK:
        raise AssertionError(f"sufficient decrease violated at iteration {state.iteration}")
    if np.min(state.w) < 0.0 or np.min(state.h) < 0.0:
        raise AssertionError(f"negative factor entry at iteration {state.iteration}")
    if _count_nonzero_rows(state.w) > spec.sparsity_k:
        raise AssertionError(f"row budget exceeded at iteration {state.iteration}")


def solve(
    spec: ProblemSpec,
    config: SolverConfig,
    callback: Callable[[SolverState, TraceRecord], None] | None = None,
) -> tuple[np.ndarray, np.ndarray, ConvergenceTrace]:
    """Run the configured algorithm to convergence or the iteration cap.

    Args:
        spec: the factorization problem.
        config: algorithm choice and hyperparameters; ``config.seed``
            drives the random initialization.
        callback: optional observer called after every iteration with
            the fresh state and its trace record.

    Returns:
        ``(w, h, trace)`` -- the final feasible factors and the full
        iteration history.  ``trace.converged`` is False when the cap
        was hit before the relative-change test fired.
    """
    w0, h0 = init_factors(spec, config.seed)
    beta_start = config.beta0 if config.algorithm == "acc_palm" else 0.0
    state = SolverState(w=w0, h=h0, w_prev=w0.copy(), h_prev=h0.copy(), beta=beta_start)
    step = acc_palm_step if config.algorithm == "acc_palm" else palm_step

    trace = ConvergenceTrace(initial_objective=smooth_objective(w0, h0, spec))
    f_prev = trace.initial_objective
    start = time.perf_counter()

    for _ in range(config.max_iter):
        prev_w, prev_h = state.w, state.h
        state, info = step(state, spec, config)

        move = _pair_norm(state.w - prev_w, state.h - prev_h)
        denom = _pair_norm(prev_w, prev_h)
        if denom > 0.0:
            rel_change = move / denom
        else:
            rel_change = 0.0 if move == 0.0 else math.inf

        record = TraceRecord(
            iteration=state.iteration,
            objective=info.objective,
            rel_change=rel_change,
            beta=info.beta_used,
            accepted=info.accepted,
            c_k=info.c_k,
            d_k=info.d_k,
            step_norm=info.step_norm,
            rho0=info.rho0,
            elapsed_s=time.perf_counter() - start,
        )
        trace.records.append(record)
        if config.debug_checks:
            _debug_verify(state, info, f_prev, spec)
        f_prev = info.objective
        if callback is not None:
            callback(state, record)
        if rel_change < config.epsilon:
            trace.converged = True
            break

    return state.w, state.h, trace
