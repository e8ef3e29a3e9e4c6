"""Command-line interface.

Three subcommands::

    sparsegnmf run <config.json> [--output-dir DIR]
    sparsegnmf gen-synthetic <spec.json> <out.csv>
    sparsegnmf trace-plot-data <trace.csv> <out.csv>

Exit codes: 0 success, 1 config/parse problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .datagen import BlockAdjacencySpec, SyntheticSpec, generate_block_adjacency, generate_synthetic
from .experiment import (
    SYNTHETIC_SCHEMA,
    ConfigError,
    load_experiment_config,
    run_experiment,
)
from .matrixio import load_trace_csv, save_csv_matrix, save_labels

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit 1, not 2.

    Exit code 2 is reserved for runtime failures; anything wrong with
    the invocation or its files is a "1".
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsegnmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p_run = sub.add_parser("run", help="run an experiment config end to end")
    p_run.add_argument("config", help="JSON experiment config")
    p_run.add_argument("--output-dir", default=None, help="override the config's output_dir")

    p_gen = sub.add_parser("gen-synthetic", help="generate a synthetic dataset to CSV")
    p_gen.add_argument("spec", help="JSON synthetic-dataset spec")
    p_gen.add_argument("out", help="output CSV path (labels go to <out stem>.labels)")

    p_trace = sub.add_parser("trace-plot-data", help="re-emit a trace as iter,objective pairs")
    p_trace.add_argument("trace", help="trace CSV written by a solver run")
    p_trace.add_argument("out", help="output CSV of bare (iteration, objective) rows")
    return parser


def _cmd_run(args) -> int:
    config = load_experiment_config(args.config)
    if args.output_dir is not None:
        config = replace(config, output_dir=Path(args.output_dir))
    records, aggregate = run_experiment(config)
    done = sum(1 for r in records if r.converged)
    print(f"{len(records)} repetition(s), {done} converged; model {aggregate['model']}")
    for name, value in aggregate["mean"].items():
        print(f"  {name}: {value:.6f} ± {aggregate['std'][name]:.6f}")
    print(f"outputs in {config.output_dir}")
    return 0


def _cmd_gen_synthetic(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise ConfigError(f"spec file not found: {spec_path}")
    try:
        raw = json.loads(spec_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{spec_path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{spec_path}: top level must be a JSON object")
    schema = raw.get("schema")
    if schema != SYNTHETIC_SCHEMA:
        raise ConfigError(f"{spec_path}: unsupported schema {schema!r}, expected {SYNTHETIC_SCHEMA!r}")

    adjacency_fields = raw.get("adjacency")
    fields = {k: v for k, v in raw.items() if k not in ("schema", "adjacency")}
    if "means" in fields:
        fields["means"] = tuple(fields["means"])
    try:
        spec = SyntheticSpec(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{spec_path}: {exc}") from None

    x, labels = generate_synthetic(spec)
    out = Path(args.out)
    save_csv_matrix(out, x)
    labels_path = out.with_suffix(".labels")
    save_labels(labels_path, labels)
    written = [str(out), str(labels_path)]

    if adjacency_fields is not None:
        if "block_sizes" in adjacency_fields:
            adjacency_fields = dict(adjacency_fields)
            adjacency_fields["block_sizes"] = tuple(adjacency_fields["block_sizes"])
        try:
            block = BlockAdjacencySpec(**adjacency_fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{spec_path}: adjacency: {exc}") from None
        if sum(block.block_sizes) != spec.n_samples:
            raise ConfigError(
                f"{spec_path}: adjacency block sizes sum to {sum(block.block_sizes)}"
                f" but the dataset has {spec.n_samples} samples"
            )
        adjacency_path = out.with_suffix(".adjacency.csv")
        save_csv_matrix(adjacency_path, generate_block_adjacency(block))
        written.append(str(adjacency_path))

    print("wrote " + ", ".join(written))
    return 0


def _cmd_trace_plot_data(args) -> int:
    columns = load_trace_csv(args.trace)
    for needed in ("iter", "objective"):
        if needed not in columns:
            raise ConfigError(f"{args.trace}: trace file lacks a {needed!r} column")
    with open(args.out, "w") as fh:
        for it, obj in zip(columns["iter"], columns["objective"]):
            fh.write(f"{int(it)},{obj:.17g}\n")
    print(f"wrote {len(columns['iter'])} data points to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "gen-synthetic": _cmd_gen_synthetic,
        "trace-plot-data": _cmd_trace_plot_data,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
