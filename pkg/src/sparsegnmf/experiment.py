"""Experiment orchestration: configs, repetition loops, reports.

A JSON config file describes one experiment: a dataset source, a graph
source, model sizes, solver settings and a repetition count.  Each
repetition re-initializes the factors from ``base seed + repetition
index``, solves, clusters the coefficient columns and scores them.  The
runner writes one trace CSV per repetition plus an aggregate JSON, a
human-readable table and rendered figures into the output directory.

Config schema (JSON, see README for the full field list)::

    {
      "schema": "sparsegnmf/config/1",
      "dataset": {"type": "synthetic" | "csv", ...},
      "graph":   {"type": "knn" | "supplied" | "block", ...},
      "model":   {"rank": r, "sparsity_k": k, "lambda": l},
      "solver":  {... SolverConfig fields ...},
      "repetitions": 10,
      "output_dir": "out"
    }
"""

from __future__ import annotations

import datetime
import hashlib
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .datagen import BlockAdjacencySpec, SyntheticSpec, generate_block_adjacency, generate_synthetic
from .graph import GraphModel, WeightScheme, build_knn_graph, from_adjacency
from .matrixio import load_csv_matrix, load_labels
from .metrics import MetricReport, kmeans, relative_error
from .metrics import acc as acc_score
from .metrics import nmi as nmi_score
from .objective import ProblemSpec
from .plotting import save_convergence_figure, save_metrics_figure
from .solvers import ConvergenceTrace, SolverConfig, solve

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "load_experiment_config",
    "run_experiment",
    "model_label",
]

CONFIG_SCHEMA = "sparsegnmf/config/1"
SYNTHETIC_SCHEMA = "sparsegnmf/synthetic/1"
AGGREGATE_SCHEMA = "sparsegnmf/aggregate/1"


class ConfigError(ValueError):
    """A config file is malformed or references missing inputs."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed and validated experiment description.

    ``dataset`` is either a SyntheticSpec or a dict with resolved csv
    paths; ``graph_source`` one of a knn dict, the literal string
    ``"supplied"``, or a BlockAdjacencySpec.
    """

    dataset: SyntheticSpec | dict
    graph_source: dict | str | BlockAdjacencySpec
    rank: int
    sparsity_k: int
    lam: float
    solver: SolverConfig
    repetitions: int
    output_dir: Path


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one repetition."""

    config_fingerprint: str
    seed: int
    metrics: MetricReport
    iterations: int
    wall_time: float
    converged: bool


def _require(mapping, key: str, where: str):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _resolve(base_dir: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def _parse_dataset(section: dict, base_dir: Path):
    kind = _require(section, "type", "dataset")
    if kind == "synthetic":
        fields = {k: v for k, v in section.items() if k != "type"}
        if "means" in fields:
            fields["means"] = tuple(fields["means"])
        try:
            return SyntheticSpec(**fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dataset: {exc}") from None
    if kind == "csv":
        out = {"path": _resolve(base_dir, _require(section, "path", "dataset"))}
        if "labels" in section:
            out["labels"] = _resolve(base_dir, section["labels"])
        if "adjacency" in section:
            out["adjacency"] = _resolve(base_dir, section["adjacency"])
        for key, path in out.items():
            if not path.is_file():
                raise ConfigError(f"dataset: {key} file not found: {path}")
        return out
    raise ConfigError(f"dataset: unknown type {kind!r}, expected 'synthetic' or 'csv'")


def _parse_graph(section: dict):
    kind = _require(section, "type", "graph")
    if kind == "knn":
        spec = {"neighbors": int(section.get("neighbors", 5))}
        scheme_kind = section.get("scheme", "gaussian")
        sigma = section.get("sigma")
        try:
            spec["scheme"] = WeightScheme(scheme_kind, sigma)
        except ValueError as exc:
            raise ConfigError(f"graph: {exc}") from None
        return spec
    if kind == "supplied":
        return "supplied"
    if kind == "block":
        fields = {k: v for k, v in section.items() if k != "type"}
        if "block_sizes" in fields:
            fields["block_sizes"] = tuple(fields["block_sizes"])
        try:
            return BlockAdjacencySpec(**fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"graph: {exc}") from None
    raise ConfigError(f"graph: unknown type {kind!r}, expected 'knn', 'supplied' or 'block'")


def load_experiment_config(path) -> ExperimentConfig:
    """Parse and pre-flight-validate a JSON config file.

    Relative paths inside the file (csv inputs, output_dir) are resolved
    against the config file's own directory.  All referenced input files
    are checked for existence here, before any run starts.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    schema = raw.get("schema")
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"{path}: unsupported schema {schema!r}, expected {CONFIG_SCHEMA!r}")

    base_dir = path.parent
    dataset = _parse_dataset(_require(raw, "dataset", str(path)), base_dir)
    graph_source = _parse_graph(_require(raw, "graph", str(path)))
    model = _require(raw, "model", str(path))
    solver_fields = dict(raw.get("solver", {}))
    try:
        solver = SolverConfig(**solver_fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None

    repetitions = int(raw.get("repetitions", 10))
    if repetitions < 1:
        raise ConfigError(f"repetitions must be positive, got {repetitions}")
    if graph_source == "supplied" and (isinstance(dataset, SyntheticSpec) or "adjacency" not in dataset):
        raise ConfigError("graph type 'supplied' needs an 'adjacency' path in the dataset section")

    try:
        rank = int(_require(model, "rank", "model"))
        sparsity_k = int(_require(model, "sparsity_k", "model"))
        lam = float(_require(model, "lambda", "model"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from None

    output_dir = _resolve(base_dir, str(raw.get("output_dir", "out")))
    return ExperimentConfig(
        dataset=dataset,
        graph_source=graph_source,
        rank=rank,
        sparsity_k=sparsity_k,
        lam=lam,
        solver=solver,
        repetitions=repetitions,
        output_dir=output_dir,
    )


def model_label(lam: float, sparsity_k: int, n_features: int) -> str:
    """Name the model variant a (lambda, k) setting corresponds to."""
    graph_part = "gnmf" if lam > 0.0 else "nmf"
    sparse_part = "" if sparsity_k >= n_features else "+rowsparse"
    return graph_part + sparse_part


def _materialize(config: ExperimentConfig):
    """Turn the config into (x, labels-or-None, GraphModel)."""
    if isinstance(config.dataset, SyntheticSpec):
        x, labels = generate_synthetic(config.dataset)
    else:
        x = load_csv_matrix(config.dataset["path"], nonneg=True)
        labels = load_labels(config.dataset["labels"]) if "labels" in config.dataset else None
        if labels is not None and labels.shape[0] != x.shape[1]:
            raise ConfigError(
                f"label count {labels.shape[0]} does not match sample count {x.shape[1]}"
            )

    source = config.graph_source
    if source == "supplied":
        graph = from_adjacency(load_csv_matrix(config.dataset["adjacency"]))
    elif isinstance(source, BlockAdjacencySpec):
        if sum(source.block_sizes) != x.shape[1]:
            raise ConfigError(
                f"block sizes sum to {sum(source.block_sizes)} but the dataset has"
                f" {x.shape[1]} samples"
            )
        graph = from_adjacency(generate_block_adjacency(source))
    else:
        graph = build_knn_graph(x, source["neighbors"], source["scheme"])
    if graph.n_samples != x.shape[1]:
        raise ConfigError(
            f"graph covers {graph.n_samples} samples, dataset has {x.shape[1]}"
        )
    return x, labels, graph


def _canonical_config_dict(config: ExperimentConfig) -> dict:
    """Config as plain data for fingerprinting; excludes output_dir."""
    if isinstance(config.dataset, SyntheticSpec):
        dataset = {"type": "synthetic", **_dataclass_dict(config.dataset)}
    else:
        dataset = {"type": "csv", **{k: str(v) for k, v in config.dataset.items()}}
    source = config.graph_source
    if source == "supplied":
        graph = {"type": "supplied"}
    elif isinstance(source, BlockAdjacencySpec):
        graph = {"type": "block", **_dataclass_dict(source)}
    else:
        graph = {
            "type": "knn",
            "neighbors": source["neighbors"],
            "scheme": source["scheme"].kind,
            "sigma": source["scheme"].sigma,
        }
    return {
        "schema": CONFIG_SCHEMA,
        "dataset": dataset,
        "graph": graph,
        "model": {"rank": config.rank, "sparsity_k": config.sparsity_k, "lambda": config.lam},
        "solver": _dataclass_dict(config.solver),
        "repetitions": config.repetitions,
    }


def _dataclass_dict(obj) -> dict:
    out = {}
    for name in obj.__dataclass_fields__:
        value = getattr(obj, name)
        out[name] = list(value) if isinstance(value, tuple) else value
    return out


def config_fingerprint(config: ExperimentConfig) -> str:
    canonical = json.dumps(_canonical_config_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def run_experiment(config: ExperimentConfig) -> tuple[list[RunRecord], dict]:
    """Execute all repetitions and write every report artifact.

    Returns the per-repetition records and the aggregate dictionary that
    was saved as ``aggregate.json``.  Also writes ``trace_rep<i>.csv``
    per repetition, ``report.txt``, and the two figures
    (``convergence.png``, ``metrics.png``) into ``config.output_dir``.
    """
    x, labels, graph = _materialize(config)
    problem = ProblemSpec(
        x=x, rank=config.rank, sparsity_k=config.sparsity_k, lam=config.lam, graph=graph
    )
    fingerprint = config_fingerprint(config)
    n_clusters = int(np.unique(labels).size) if labels is not None else config.rank

    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    records: list[RunRecord] = []
    traces: list[ConvergenceTrace] = []
    per_run: list[dict] = []
    for rep in range(config.repetitions):
        seed = config.solver.seed + rep
        solver = replace(config.solver, seed=seed)
        started = time.perf_counter()
        w, h, trace = solve(problem, solver)
        wall = time.perf_counter() - started

        clustering = kmeans(h.T, n_clusters, seed=seed)
        report_kwargs = {"relative_error": relative_error(x, w, h)}
        if labels is not None:
            report_kwargs["nmi"] = nmi_score(clustering.labels, labels)
            report_kwargs["acc"] = acc_score(clustering.labels, labels)
        metrics = MetricReport(**report_kwargs)

        trace.write_csv(out_dir / f"trace_rep{rep:03d}.csv")
        traces.append(trace)
        records.append(
            RunRecord(
                config_fingerprint=fingerprint,
                seed=seed,
                metrics=metrics,
                iterations=trace.iterations,
                wall_time=wall,
                converged=trace.converged,
            )
        )
        entry = {
            "seed": seed,
            "iterations": trace.iterations,
            "converged": trace.converged,
            "final_objective": trace.final_objective,
            **metrics.to_dict(),
        }
        per_run.append(entry)

    metric_names = [k for k in ("nmi", "acc", "relative_error", "iterations", "final_objective")
                    if k in per_run[0]]
    mean: dict = {}
    std: dict = {}
    for name in metric_names:
        mean[name], std[name] = _mean_std([entry[name] for entry in per_run])

    aggregate = {
        "schema": AGGREGATE_SCHEMA,
        "config_fingerprint": fingerprint,
        "model": model_label(config.lam, config.sparsity_k, problem.n_features),
        "repetitions": config.repetitions,
        "per_run": per_run,
        "mean": mean,
        "std": std,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out_dir / "aggregate.json", "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_report_table(out_dir / "report.txt", aggregate)
    save_convergence_figure(traces, out_dir / "convergence.png")
    save_metrics_figure(mean, std, out_dir / "metrics.png")
    return records, aggregate


def _write_report_table(path, aggregate: dict) -> None:
    mean, std = aggregate["mean"], aggregate["std"]
    names = list(mean)
    header = f"{'model':<16}{'reps':>6}  " + "  ".join(f"{n:>22}" for n in names)
    cells = "  ".join(f"{mean[n]:>12.6f} ± {std[n]:<8.6f}" for n in names)
    line = f"{aggregate['model']:<16}{aggregate['repetitions']:>6}  {cells}"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write("-" * len(header) + "\n")
        fh.write(line + "\n")
