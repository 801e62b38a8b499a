"""Result tables: CSV that round-trips exactly, JSON documents, plot data.

Cells are ``int``, ``float``, ``str`` or ``None``.  Floats are written with
``repr`` (shortest round-trip form), ints without a decimal point, ``None`` as
an empty cell, so :func:`read_csv` recovers the in-memory table exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["Table", "read_csv", "write_json", "plot_projection", "gnuplot_script"]

_INT_RE = re.compile(r"^-?\d+$")


def _format(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool):
        return str(int(cell))
    if isinstance(cell, int):
        return str(cell)
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def _parse(text: str):
    if text == "":
        return None
    if _INT_RE.match(text):
        return int(text)
    try:
        val = float(text)
    except ValueError:
        return text
    # out-of-range literals such as "1e400" stay text; repr(val) round-trips otherwise
    return val if repr(val) == text else text


def _normalize(cell):
    if cell is None or isinstance(cell, str):
        return cell
    if isinstance(cell, bool):
        return int(cell)
    if isinstance(cell, int):
        return cell
    if hasattr(cell, "item"):  # numpy scalars
        cell = cell.item()
    if isinstance(cell, int):
        return cell
    return float(cell)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence] = ()):
        self.columns = tuple(columns)
        self.rows = []
        for r in rows:
            self.append(r)

    def append(self, row: Sequence) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(self.columns)}")
        self.rows.append(tuple(_normalize(c) for c in row))

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_format(c) for c in r])
        return buf.getvalue()

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv_text())
        return path

    @classmethod
    def from_csv_text(cls, text: str) -> "Table":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        return cls(header, ([_parse(c) for c in row] for row in reader))

    def __len__(self) -> int:
        return len(self.rows)


def read_csv(path: str | Path) -> Table:
    return Table.from_csv_text(Path(path).read_text())


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: str | Path, doc: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def plot_projection(table: Table, x: str, y: str, series: str | Sequence[str] | None = None) -> Table:
    """Plot data ``(x, y, series)`` taken verbatim from ``table``.

    Every ``x`` and ``y`` cell is copied from the source rows, so the plot data
    never contains a value that is absent from the table.  ``series`` names
    the column(s) whose values label each row.
    """
    xi, yi = table.columns.index(x), table.columns.index(y)
    if series is None:
        keys = []
    elif isinstance(series, str):
        keys = [table.columns.index(series)]
    else:
        keys = [table.columns.index(s) for s in series]
    out = Table(("x", "y", "series"))
    for r in table.rows:
        label = "/".join(f"{table.columns[j]}={_format(r[j])}" for j in keys) or y
        out.append((r[xi], r[yi], label))
    return out


def gnuplot_script(data_file: str, title: str, xlabel: str, ylabel: str, logscale: bool = False) -> str:
    """Gnuplot commands that draw one point set per series of a plot CSV."""
    lines = [
        "set datafile separator ','",
        f"set title {json.dumps(title)}",
        f"set xlabel {json.dumps(xlabel)}",
        f"set ylabel {json.dumps(ylabel)}",
        "set key outside",
    ]
    if logscale:
        lines.append("set logscale xy")
    lines += [
        f"file = {json.dumps(data_file)}",
        "series = system(\"tail -n +2 \" . file . \" | cut -d, -f3 | sort -u\")",
        "plot for [s in series] file using 1:(strcol(3) eq s ? $2 : NaN) "
        "skip 1 with points title s",
    ]
    return "\n".join(lines) + "\n"
