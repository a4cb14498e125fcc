"""CSV writers, long-form plot data and run manifests.

Floats are written with ``repr`` so files round-trip exactly and reruns are
byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError

__all__ = [
    "fmt",
    "dump_rows",
    "write_rows",
    "write_matrix",
    "read_measure_csv",
    "emit_plot_data",
    "read_plot_data",
    "RunManifest",
]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def dump_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        dump_rows(fh, header, rows)
    return path


def write_matrix(path, matrix, grid, index_name="t") -> Path:
    """Rows = time, columns = grid positions."""
    matrix = np.asarray(matrix)
    header = [index_name] + [fmt(float(x)) for x in grid]
    rows = ([t, *row] for t, row in enumerate(matrix))
    return write_rows(path, header, rows)


def read_measure_csv(path):
    """Read ``x,weight`` rows; returns (grid, weights)."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"cannot read measure: {exc.strerror}", None, str(path)) from None
    xs, ws = [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "weight"]:
            raise InputError("expected header 'x,weight'", 1, str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InputError("expected 2 columns", lineno, str(path))
            try:
                xs.append(float(row[0]))
                ws.append(float(row[1]))
            except ValueError:
                raise InputError(f"non-numeric value in {row}", lineno, str(path)) from None
    if not xs:
        raise InputError("measure file has no rows", None, str(path))
    return np.array(xs), np.array(ws)


def emit_plot_data(series, path, groups=None) -> Path:
    """Write named sequences as long-form ``series,index,value`` CSV.

    ``groups`` maps series name to a group label; sequences in one group must
    share a length.  Without it all series form one group.
    """
    if not series:
        raise InputError("no series to emit")
    lengths: dict[str, tuple[int, str]] = {}
    for name, values in series.items():
        group = groups.get(name, name) if groups else ""
        n = len(values)
        if n == 0:
            raise InputError(f"series {name!r} is empty")
        if group in lengths and lengths[group][0] != n:
            other = lengths[group][1]
            raise InputError(
                f"series {name!r} has length {n}, {other!r} in the same group has {lengths[group][0]}"
            )
        lengths.setdefault(group, (n, name))
    rows = ((name, i, float(v)) for name, values in series.items() for i, v in enumerate(values))
    return write_rows(path, ["series", "index", "value"], rows)


def read_plot_data(path) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.setdefault(row["series"], []).append(float(row["value"]))
    return out


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seeds: list[int] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    invocation: list[str] = field(default_factory=list)
    version: str = __version__

    def write(self, path) -> Path:
        """Written last, after every listed output exists."""
        path = Path(path)
        missing = [p for p in self.outputs if not Path(p).exists()]
        if missing:
            raise RuntimeError(f"manifest lists missing outputs: {missing}")
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path
