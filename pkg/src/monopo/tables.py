"""Column tables (ordered ``dict`` of equal-length arrays) and their CSV form."""
from __future__ import annotations

import csv
import io
import os
from typing import IO

import numpy as np

Table = dict


def write_csv(table: Table, dest: str | os.PathLike | IO[str], comments: dict | None = None):
    """Write ``table`` as CSV with a header row; ``comments`` become ``# key=value`` lines."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            write_csv(table, fh, comments)
        return
    for key, value in (comments or {}).items():
        dest.write(f"# {key}={value}\n")
    names = list(table)
    cols = [np.atleast_1d(np.asarray(table[n])) for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def read_csv(source: str | os.PathLike | IO[str]) -> tuple[Table, dict]:
    """Inverse of :func:`write_csv`; returns ``(table, comments)`` with float columns."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    comments = {}
    lines = []
    for line in source:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            comments[key.strip()] = value.strip()
        elif line.strip():
            lines.append(line)
    reader = csv.reader(io.StringIO("".join(lines)))
    names = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return {n: data[:, i] for i, n in enumerate(names)}, comments
