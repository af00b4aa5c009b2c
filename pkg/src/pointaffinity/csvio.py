"""Delimited file ingestion and report writers.

Readers report problems with line numbers; writers use fixed formats so a
rerun with the same configuration is byte-identical.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .data import Dataset, Partition
from .errors import ParseError
from .scores import AffinityVector

FLOAT_FMT = "%.9g"
# coordinates meant to be re-ingested round-trip exactly
POINT_FMT = "%.17g"


def _float_field(token: str, path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{path}: line {line_no}: {token!r} is not a number") from None
    if math.isnan(value) or math.isinf(value):
        raise ParseError(f"{path}: line {line_no}: non-finite value {token!r}")
    return value


def _is_header(row: list[str]) -> bool:
    for token in row:
        try:
            float(token)
        except ValueError:
            return True
    return False


def read_points_csv(path, expected_dim: int | None = None) -> Dataset:
    """Comma-separated floats, one point per row; a non-numeric first row is
    treated as a header and skipped."""
    rows: list[list[float]] = []
    dim = expected_dim
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            row = [t.strip() for t in row if t.strip() != ""]
            if not row:
                continue
            if line_no == 1 and _is_header(row):
                continue
            values = [_float_field(t, path, line_no) for t in row]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ParseError(
                    f"{path}: line {line_no}: expected {dim} fields, got {len(values)}")
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Dataset(np.array(rows))


def read_labels_csv(path, k: int | None = None) -> Partition:
    """One integer label per line; a non-numeric first row is skipped."""
    labels: list[int] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            token = raw.strip().split(",")[0].strip()
            if token == "":
                continue
            try:
                value = int(token)
            except ValueError:
                if line_no == 1:
                    continue
                raise ParseError(
                    f"{path}: line {line_no}: {token!r} is not an integer label") from None
            if value < 0:
                raise ParseError(f"{path}: line {line_no}: negative label {value}")
            labels.append(value)
    if not labels:
        raise ParseError(f"{path}: no labels")
    return Partition.from_labels(np.array(labels, dtype=np.int64), k)


def read_weights_csv(path, k: int) -> np.ndarray:
    """One float per line, exactly k lines."""
    values: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            token = raw.strip()
            if token == "":
                continue
            values.append(_float_field(token, path, line_no))
    if len(values) != k:
        raise ParseError(f"{path}: expected {k} weights, got {len(values)}")
    return np.array(values)


def write_points_csv(path, points) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in pts:
            fh.write(",".join(POINT_FMT % v for v in row))
            fh.write("\n")


def write_labels_csv(path, labels) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for v in np.asarray(labels).reshape(-1):
            fh.write(f"{int(v)}\n")


def affinity_header(k: int) -> str:
    alphas = ",".join(f"alpha_{j}" for j in range(k))
    return f"id,score,stable,{alphas},clipped"


def write_affinity_csv(path, results: list[AffinityVector | None], k: int) -> None:
    """One row per point: id, scalar score, stability flag, all alphas, clip flag.

    Failed points carry nan scores so row ids stay aligned with the input.
    """
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(affinity_header(k))
        fh.write("\n")
        for i, res in enumerate(results):
            if res is None:
                alphas = ",".join("nan" for _ in range(k))
                fh.write(f"{i},nan,false,{alphas},false\n")
                continue
            alphas = ",".join(FLOAT_FMT % a for a in res.alphas)
            stable = "true" if res.stable else "false"
            clipped = "true" if res.clipped else "false"
            fh.write(f"{i},{FLOAT_FMT % res.score},{stable},{alphas},{clipped}\n")


def read_affinity_csv(path):
    """Parse a file written by write_affinity_csv.

    Returns (ids, scores, stable flags, alphas matrix, clipped flags).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 5 or header[0] != "id":
            raise ParseError(f"{path}: missing affinity header")
        k = len(header) - 4
        ids, scores, stable, alphas, clipped = [], [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != k + 4:
                raise ParseError(
                    f"{path}: line {line_no}: expected {k + 4} fields, got {len(row)}")
            ids.append(int(row[0]))
            scores.append(float(row[1]))
            stable.append(row[2].strip().lower() == "true")
            alphas.append([float(t) for t in row[3:3 + k]])
            clipped.append(row[-1].strip().lower() == "true")
    return (np.array(ids), np.array(scores), np.array(stable, dtype=bool),
            np.array(alphas), np.array(clipped, dtype=bool))


def write_report_csv(path, rows: list[tuple[str, float]]) -> None:
    """Two-column (metric, value) report."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("metric,value\n")
        for name, value in rows:
            if isinstance(value, (int, np.integer)):
                fh.write(f"{name},{int(value)}\n")
            else:
                fh.write(f"{name},{FLOAT_FMT % value}\n")
