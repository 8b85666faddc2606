"""
Deterministic CSV/JSON export of distributions, series and Wigner fields.

CSV files carry one header row.  Floats are written with 17 significant
digits so they read back bit-for-bit; JSON uses Python's shortest
round-trip float repr.  Row order is ascending t, then n, then k.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .wigner import PhaseSpaceGrid, WignerField

__all__ = [
    "OutputError",
    "DISTRIBUTION_COLUMNS",
    "SERIES_COLUMNS",
    "FIELD_COLUMNS",
    "write_table",
    "write_field_rows",
    "field_row_blocks",
    "read_table",
    "read_field",
]

DISTRIBUTION_COLUMNS = ("t", "n", "p")
SERIES_COLUMNS = ("t", "value")
FIELD_COLUMNS = ("t", "n", "k", "w_rr", "w_ll", "re_w_rl", "im_w_rl")
_INT_COLUMNS = {"t", "n"}


class OutputError(OSError):
    """Raised when an output file cannot be written; carries the path."""

    def __init__(self, path, reason):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = str(path)


def _fmt(columns) -> list[str]:
    return ["%d" if c in _INT_COLUMNS else "%.17g" for c in columns]


def _json_row(columns, row) -> list:
    return [int(v) if c in _INT_COLUMNS else float(v) for c, v in zip(columns, row)]


def write_table(path, columns, rows, fmt: str = "csv") -> Path:
    """Write a 2-D array-like of rows; see :func:`write_field_rows` for streaming."""
    return write_field_rows(path, columns, [np.asarray(rows, dtype=float).reshape(-1, len(columns))], fmt)


def write_field_rows(path, columns, blocks: Iterable[np.ndarray], fmt: str = "csv") -> Path:
    """Stream row blocks (each shape ``(m, len(columns))``) to ``path``."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            if fmt == "csv":
                fh.write(",".join(columns) + "\n")
                spec = _fmt(columns)
                for block in blocks:
                    if len(block):
                        np.savetxt(fh, block, fmt=spec, delimiter=",")
            else:
                fh.write('{"columns": ' + json.dumps(list(columns)) + ', "rows": [')
                first = True
                for block in blocks:
                    for row in block:
                        fh.write(("\n" if first else ",\n") + json.dumps(_json_row(columns, row)))
                        first = False
                fh.write("\n]}\n")
    except OSError as exc:
        raise OutputError(path, exc.strerror or exc) from exc
    return path


def field_row_blocks(
    t: int,
    grid: PhaseSpaceGrid,
    row_blocks: Iterable[tuple[np.ndarray, np.ndarray]],
    even_only: bool = False,
) -> Iterator[np.ndarray]:
    """
    Flatten ``(n_values, rows)`` blocks into table rows ``t,n,k,w_rr,w_ll,re_w_rl,im_w_rl``.

    ``rows`` has shape ``(len(n_values), K, 2, 2)``.  With ``even_only`` the
    odd-n rows are skipped; they must be identically zero.
    """
    k = grid.k
    K = k.size
    for n_vals, rows in row_blocks:
        if even_only:
            odd = n_vals % 2 != 0
            if np.any(rows[odd]):
                raise ValueError("odd-n rows are nonzero; cannot export even rows only")
            n_vals, rows = n_vals[~odd], rows[~odd]
        m = n_vals.size
        if m == 0:
            continue
        out = np.empty((m * K, 7))
        out[:, 0] = t
        out[:, 1] = np.repeat(n_vals, K)
        out[:, 2] = np.tile(k, m)
        flat = rows.reshape(m * K, 2, 2)
        out[:, 3] = flat[:, 0, 0].real
        out[:, 4] = flat[:, 1, 1].real
        out[:, 5] = flat[:, 0, 1].real
        out[:, 6] = flat[:, 0, 1].imag
        out += 0.0  # no "-0" in the output
        yield out


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a CSV or JSON table written by this module."""
    path = Path(path)
    with open(path) as fh:
        head = fh.read(1)
        fh.seek(0)
        if head == "{":
            doc = json.load(fh)
            cols = list(doc["columns"])
            data = np.asarray(doc["rows"], dtype=float).reshape(-1, len(cols))
        else:
            cols = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2).reshape(-1, len(cols))
    return cols, data


def _snap(x: float) -> float:
    q = round(x / (math.pi / 2))
    return q * math.pi / 2 if abs(x - q * math.pi / 2) < 1e-9 else x


def read_field(path) -> WignerField:
    """
    Rebuild a :class:`WignerField` from a field file.

    Sites absent from the file (odd rows of an even-only export) are zero.
    """
    cols, data = read_table(path)
    if tuple(cols) != FIELD_COLUMNS:
        raise ValueError(f"{path} is not a Wigner field file (columns {cols})")
    ts = np.unique(data[:, 0])
    if ts.size != 1:
        raise ValueError(f"{path} holds {ts.size} time slices, expected one")
    k = np.unique(data[:, 2])
    K = k.size
    dk = (k[-1] - k[0]) / (K - 1) if K > 1 else 2 * math.pi
    grid = PhaseSpaceGrid(
        int(data[:, 1].min()),
        int(data[:, 1].max()),
        K,
        _snap(k[0] - dk / 2),
        _snap(k[-1] + dk / 2),
    )
    field = WignerField.zeros(grid, int(ts[0]))
    ni = data[:, 1].astype(np.int64) - grid.n_min
    ki = np.searchsorted(k, data[:, 2])
    v = field.values
    v[ni, ki, 0, 0] = data[:, 3]
    v[ni, ki, 1, 1] = data[:, 4]
    v[ni, ki, 0, 1] = data[:, 5] + 1j * data[:, 6]
    v[ni, ki, 1, 0] = data[:, 5] - 1j * data[:, 6]
    return field
