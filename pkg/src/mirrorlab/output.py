"""Deterministic CSV writing and optional gnuplot sidecar scripts."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_csv", "write_blocks", "write_gnuplot", "fmt"]


def fmt(value):
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def _header(fh, header):
    for key, value in header or ():
        text = str(value).replace("\n", " ")
        fh.write(f"# {key} = {text}\n")


def write_csv(path, columns, rows=None, header=(), data=None):
    """Write ``columns`` either from ``rows`` (iterables) or ``data`` (dict of arrays).

    ``header`` is a sequence of ``(key, value)`` pairs emitted as ``#`` comments.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if data is not None:
        arrays = [np.asarray(data[c]) for c in columns]
        rows = zip(*arrays) if arrays else ()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _header(fh, header)
        fh.write(",".join(columns) + "\n")
        for row in rows or ():
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_blocks(path, columns, blocks, header=()):
    """Several data sets in one file, separated by two blank lines (gnuplot ``index``).

    ``blocks`` is a sequence of ``(label, data_dict)``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _header(fh, header)
        fh.write(",".join(columns) + "\n")
        for i, (label, data) in enumerate(blocks):
            if i:
                fh.write("\n\n")
            fh.write(f"# block {i}: {label}\n")
            for row in zip(*[np.asarray(data[c]) for c in columns]):
                fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_gnuplot(path, title, plots, xlabel="tau", ylabel="x", extra=()):
    """Minimal gnuplot script; ``plots`` are ``(csv_name, using, title, style)`` tuples."""
    path = Path(path)
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",  # the first non-comment line holds the column names
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        *extra,
    ]
    parts = [f"'{csv}' using {using} with {style} title '{label}'" for csv, using, label, style in plots]
    lines.append("plot " + ", \\\n     ".join(parts))
    lines.append("pause -1")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
