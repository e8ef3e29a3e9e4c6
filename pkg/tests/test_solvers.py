"""Solver behavior: descent, feasibility, acceleration, determinism."""

import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from sparsegnmf.datagen import BlockAdjacencySpec, SyntheticSpec, generate_block_adjacency, generate_synthetic
from sparsegnmf.graph import from_adjacency
from sparsegnmf.objective import ProblemSpec, smooth_objective
from sparsegnmf.solvers import (
    TRACE_CSV_COLUMNS,
    ConvergenceTrace,
    NonFiniteError,
    SolverConfig,
    SolverState,
    init_factors,
    palm_step,
    solve,
)


def zero_graph(n):
    return from_adjacency(np.zeros((n, n)))


def small_problem(seed=0, p=8, n=10, r=2, k=5, lam=0.4):
    rng = np.random.default_rng(seed)
    x = rng.random((p, n))
    upper = np.triu(rng.random((n, n)) < 0.3, k=1) * rng.random((n, n))
    graph = from_adjacency(np.triu(upper, 1) + np.triu(upper, 1).T)
    return ProblemSpec(x=x, rank=r, sparsity_k=k, lam=lam, graph=graph)


def synthetic_problem(rank=3, k=17, lam=1.0):
    x, _ = generate_synthetic(SyntheticSpec(seed=0))
    graph = from_adjacency(generate_block_adjacency(BlockAdjacencySpec(seed=0)))
    return ProblemSpec(x=x, rank=rank, sparsity_k=k, lam=lam, graph=graph)


class TestConfigValidation:
    def test_defaults_valid(self):
        cfg = SolverConfig()
        assert cfg.algorithm == "acc_palm"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"algorithm": "bfgs"},
            {"max_iter": 0},
            {"epsilon": 0.0},
            {"beta0": 0.7, "beta_max": 0.5},
            {"beta_max": 1.0},
            {"t_factor": 1.0},
            {"gamma_step": 1.0},
            {"rho0": 0.0},
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestInitFactors:
    def test_deterministic(self):
        spec = small_problem()
        w1, h1 = init_factors(spec, 123)
        w2, h2 = init_factors(spec, 123)
        assert_array_equal(w1, w2)
        assert_array_equal(h1, h2)

    def test_different_seeds_differ(self):
        spec = small_problem()
        w1, _ = init_factors(spec, 1)
        w2, _ = init_factors(spec, 2)
        assert not np.array_equal(w1, w2)

    def test_row_budget_respected(self):
        spec = small_problem(k=3)
        w0, _ = init_factors(spec, 0)
        assert int(np.sum(np.any(w0 != 0.0, axis=1))) <= 3

    def test_product_mean_matches_data_mean(self):
        for seed in range(5):
            rng = np.random.default_rng(seed + 100)
            x = rng.random((12, 16)) * rng.uniform(0.5, 4.0)
            spec = ProblemSpec(x=x, rank=2, sparsity_k=12, lam=0.0, graph=zero_graph(16))
            w0, h0 = init_factors(spec, seed)
            ratio = float(np.mean(w0 @ h0)) / float(np.mean(x))
            assert 1 / 3 < ratio < 3


class TestPalmStep:
    def test_origin_is_fixed_point(self):
        # With both factors at zero, every gradient term vanishes, so a
        # step returns the same factors and zero movement.
        spec = small_problem()
        p, n, r = spec.n_features, spec.n_samples, spec.rank
        zero_state = SolverState(
            w=np.zeros((p, r)), h=np.zeros((r, n)),
            w_prev=np.zeros((p, r)), h_prev=np.zeros((r, n)), beta=0.0,
        )
        new_state, info = palm_step(zero_state, spec, SolverConfig(algorithm="palm"))
        assert_array_equal(new_state.w, zero_state.w)
        assert_array_equal(new_state.h, zero_state.h)
        assert info.step_norm == 0.0
        # objective unchanged at 0.5||x||^2
        assert info.objective == smooth_objective(zero_state.w, zero_state.h, spec)

    def test_rank1_factorable_reaches_zero(self):
        rng = np.random.default_rng(0)
        w_true = rng.uniform(0.2, 1.0, (6, 1))
        h_true = rng.uniform(0.2, 1.0, (1, 9))
        spec = ProblemSpec(x=w_true @ h_true, rank=1, sparsity_k=6, lam=0.0, graph=zero_graph(9))
        _, _, trace = solve(spec, SolverConfig(algorithm="palm", epsilon=1e-12, max_iter=500, seed=0))
        assert trace.final_objective < 1e-6

    def test_non_finite_data_raises_with_iteration(self):
        spec = ProblemSpec(
            x=np.full((4, 4), 1e160), rank=1, sparsity_k=4, lam=0.0, graph=zero_graph(4)
        )
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NonFiniteError, match="iteration 1") as exc_info:
                solve(spec, SolverConfig(algorithm="palm", max_iter=10, seed=0))
        assert exc_info.value.iteration == 1


class TestAccPalmStep:
    def test_beta_zero_equals_palm(self):
        spec = small_problem()
        cfg_acc = SolverConfig(algorithm="acc_palm", beta0=0.0, beta_max=0.0, max_iter=20, epsilon=1e-12)
        cfg_palm = SolverConfig(algorithm="palm", max_iter=20, epsilon=1e-12)
        w_a, h_a, _ = solve(spec, cfg_acc)
        w_p, h_p, _ = solve(spec, cfg_palm)
        assert_array_equal(w_a, w_p)
        assert_array_equal(h_a, h_p)

    def test_first_step_no_op_extrapolation_accepted(self):
        # w_prev == w at the start, so the extrapolated point is the
        # current point and the decrease test passes.
        spec = small_problem()
        _, _, trace = solve(spec, SolverConfig(algorithm="acc_palm", max_iter=1, epsilon=1e-15))
        assert trace.records[0].accepted

    def test_beta_grows_on_accept_and_bounded(self):
        spec = synthetic_problem()
        _, _, trace = solve(spec, SolverConfig(algorithm="acc_palm", epsilon=1e-3, seed=0))
        betas = [r.beta for r in trace.records]
        assert all(0.0 <= b <= 0.99 for b in betas)
        # adaptive growth from beta0=0.5 actually happened
        assert max(betas) > 0.5

    def test_rejected_steps_shrink_beta(self):
        spec = synthetic_problem()
        _, _, trace = solve(spec, SolverConfig(algorithm="acc_palm", epsilon=1e-3, seed=0))
        recs = trace.records
        rejected = [i for i, r in enumerate(recs) if not r.accepted]
        assert rejected, "expected at least one rejection on this problem"
        for i in rejected[:-1]:
            assert recs[i + 1].beta < recs[i].beta

    def test_fixed_beta_mode(self):
        spec = small_problem()
        cfg = SolverConfig(algorithm="acc_palm", beta0=0.3, adaptive_beta=False, max_iter=15, epsilon=1e-12)
        _, _, trace = solve(spec, cfg)
        assert all(r.beta == 0.3 for r in trace.records)

    def test_faster_than_palm_on_synthetic(self):
        spec = synthetic_problem()
        _, _, t_acc = solve(spec, SolverConfig(algorithm="acc_palm", epsilon=1e-3, seed=0))
        _, _, t_palm = solve(spec, SolverConfig(algorithm="palm", epsilon=1e-3, seed=0))
        assert t_acc.iterations < t_palm.iterations


class TestSolve:
    def test_huge_epsilon_stops_after_one_iteration(self):
        spec = small_problem()
        _, _, trace = solve(spec, SolverConfig(epsilon=1e12))
        assert trace.iterations == 1
        assert trace.converged

    def test_max_iter_flags_non_convergence(self):
        spec = synthetic_problem()
        _, _, trace = solve(spec, SolverConfig(algorithm="palm", epsilon=1e-12, max_iter=5))
        assert trace.iterations == 5
        assert not trace.converged

    def test_lambda_zero_ignores_graph(self):
        # With lam=0 the model is plain NMF; two very different graphs
        # must produce bit-identical runs.
        rng = np.random.default_rng(1)
        x = rng.random((6, 12))
        upper = np.triu(rng.random((12, 12)), k=1)
        dense_graph = from_adjacency(upper + upper.T)
        spec_a = ProblemSpec(x=x, rank=2, sparsity_k=6, lam=0.0, graph=dense_graph)
        spec_b = ProblemSpec(x=x, rank=2, sparsity_k=6, lam=0.0, graph=zero_graph(12))
        cfg = SolverConfig(max_iter=30, epsilon=1e-12, seed=3)
        w_a, h_a, tr_a = solve(spec_a, cfg)
        w_b, h_b, tr_b = solve(spec_b, cfg)
        assert_array_equal(w_a, w_b)
        assert_array_equal(h_a, h_b)
        assert tr_a.objectives() == tr_b.objectives()

    @pytest.mark.parametrize("algorithm", ["palm", "acc_palm"])
    def test_monotone_descent_and_feasibility(self, algorithm):
        spec = synthetic_problem()
        seen = []
        for seed in range(2):
            cfg = SolverConfig(algorithm=algorithm, epsilon=1e-3, seed=seed)
            w, h, trace = solve(spec, cfg, callback=lambda s, r: seen.append((s.w.copy(), s.h.copy())))
            values = [trace.initial_objective] + trace.objectives()
            for prev, curr in zip(values, values[1:]):
                assert curr <= prev + 1e-10
        for w_k, h_k in seen:
            assert w_k.min() >= 0.0
            assert h_k.min() >= 0.0
            assert int(np.sum(np.any(w_k != 0.0, axis=1))) <= spec.sparsity_k

    def test_debug_checks_pass_on_clean_run(self):
        spec = small_problem()
        solve(spec, SolverConfig(max_iter=50, epsilon=1e-9, debug_checks=True))

    def test_deterministic_trace(self):
        spec = synthetic_problem()
        cfg = SolverConfig(algorithm="acc_palm", epsilon=1e-3, seed=4)
        _, _, t1 = solve(spec, cfg)
        _, _, t2 = solve(spec, cfg)
        assert t1.iterations == t2.iterations
        for a, b in zip(t1.records, t2.records):
            assert (a.objective, a.rel_change, a.beta, a.accepted, a.c_k, a.d_k, a.step_norm) == (
                b.objective, b.rel_change, b.beta, b.accepted, b.c_k, b.d_k, b.step_norm
            )

    def test_step_norms_shrink_on_converged_run(self):
        # The squared step norms are summable, so late steps must be
        # smaller than early ones on a run that converged.
        spec = synthetic_problem()
        for algorithm in ("palm", "acc_palm"):
            _, _, trace = solve(spec, SolverConfig(algorithm=algorithm, epsilon=1e-3, seed=0))
            assert trace.converged
            norms = [r.step_norm for r in trace.records]
            assert len(norms) >= 20
            assert np.mean(norms[-10:]) < np.mean(norms[:10])

    def test_final_objectives_close_between_solvers(self):
        spec = synthetic_problem()
        _, _, t_acc = solve(spec, SolverConfig(algorithm="acc_palm", epsilon=1e-3, seed=0))
        _, _, t_palm = solve(spec, SolverConfig(algorithm="palm", epsilon=1e-3, seed=0))
        rel = abs(t_acc.final_objective - t_palm.final_objective) / t_palm.final_objective
        assert rel < 0.05


class TestTraceSerialization:
    def test_csv_columns_pinned(self, tmp_path):
        spec = small_problem()
        _, _, trace = solve(spec, SolverConfig(max_iter=5, epsilon=1e-12))
        path = tmp_path / "trace.csv"
        trace.write_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == ",".join(TRACE_CSV_COLUMNS)
        assert header == "iter,objective,rel_change,beta,accepted,c_k,d_k,elapsed_s"

    def test_csv_roundtrip_values(self, tmp_path):
        from sparsegnmf.matrixio import load_trace_csv

        spec = small_problem()
        _, _, trace = solve(spec, SolverConfig(max_iter=8, epsilon=1e-12))
        path = tmp_path / "trace.csv"
        trace.write_csv(path)
        cols = load_trace_csv(path)
        assert cols["iter"] == [float(r.iteration) for r in trace.records]
        assert cols["objective"] == [r.objective for r in trace.records]
        assert cols["accepted"] == [float(r.accepted) for r in trace.records]

    def test_json_export(self, tmp_path):
        import json

        spec = small_problem()
        _, _, trace = solve(spec, SolverConfig(max_iter=3, epsilon=1e-12))
        path = tmp_path / "trace.json"
        trace.write_json(path)
        data = json.loads(path.read_text())
        assert data["converged"] == trace.converged
        assert len(data["records"]) == 3
        assert math.isclose(data["records"][0]["objective"], trace.records[0].objective)
        assert {"step_norm", "rho0"} <= set(data["records"][0])
