"""Plain-text file formats: CSV matrices, label files, trace tables.

Matrices travel as headerless comma-separated tables, one feature per
row.  Labels are one integer per line.  Values are written with 17
significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .linalg import as_matrix

__all__ = [
    "load_csv_matrix",
    "save_csv_matrix",
    "load_labels",
    "save_labels",
    "load_trace_csv",
]


def load_csv_matrix(path, nonneg: bool = False) -> np.ndarray:
    """Parse a headerless numeric CSV into a matrix.

    Args:
        path: file to read.
        nonneg: when True (data matrices), reject negative entries.

    Raises:
        ValueError: empty file, ragged rows, non-numeric cells or
            (optionally) negative entries; messages carry the 1-based
            line number.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ValueError(
                    f"{path}: line {lineno}: expected {width} columns, found {len(cells)}"
                )
            try:
                values = [float(c) for c in cells]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric cell") from None
            if nonneg and any(v < 0.0 for v in values):
                raise ValueError(f"{path}: line {lineno}: negative entry in nonnegative data")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: empty file, expected a numeric table")
    return as_matrix(rows)


def save_csv_matrix(path, m: np.ndarray) -> None:
    m = as_matrix(m)
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def load_labels(path) -> np.ndarray:
    """Read one integer label per line."""
    path = Path(path)
    labels: list[int] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: expected an integer label") from None
    if not labels:
        raise ValueError(f"{path}: empty label file")
    return np.asarray(labels, dtype=np.int64)


def save_labels(path, labels) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(labels).ravel():
            fh.write(f"{int(v)}\n")


def load_trace_csv(path) -> dict[str, list[float]]:
    """Read a solver trace CSV back as named columns."""
    path = Path(path)
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trace file")
    header = lines[0].split(",")
    columns: dict[str, list[float]] = {name: [] for name in header}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: line {lineno}: expected {len(header)} columns")
        for name, cell in zip(header, cells):
            try:
                columns[name].append(float(cell))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric cell") from None
    return columns
