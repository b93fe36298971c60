"""Comma-delimited input and output.

Curve files are wide: the first column is time, an optional ``replicate``
column follows, and every other column is one unit. Lines starting with ``#``
are comments. Output tables carry a ``# key: value`` comment header (no
timestamps) followed by a single header row.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import DataError, EmptyFile, NonMonotoneTime, ParseError
from .flm import GroupLayout
from .fourier import CurveSet, Grid

UNIFORM_RTOL = 1e-9


def _data_lines(path):
    """(line number, row) pairs for non-comment, non-blank lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            yield lineno, [c.strip() for c in row]


def _parse_float(text, lineno, column):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"row {lineno}, column {column!r}: cannot parse {text!r} as a number",
                         lineno, column) from None
    if not math.isfinite(v):
        raise ParseError(f"row {lineno}, column {column!r}: non-finite value {text!r}", lineno, column)
    return v


def _is_uniform(t):
    d = np.diff(t)
    return bool(np.all(np.abs(d - d.mean()) <= UNIFORM_RTOL * (t[-1] - t[0])))


def grid_from_times(t):
    """Grid with the same endpoints and count as ``t``; ``t_1`` is its first point."""
    r = len(t)
    h = (t[-1] - t[0]) / (r - 1)
    return Grid(float(t[0] - h), float(t[-1]), r)


def load_curves(path, target_grid=None):
    """Read a wide curve file into a :class:`CurveSet`.

    Values pass through unchanged when the source times already form a
    uniform grid equal to ``target_grid`` (or no target is given); otherwise
    each curve is linearly interpolated onto the target, or onto a uniform
    grid with the source endpoints, and ``interpolated`` is set.
    """
    lines = list(_data_lines(path))
    if not lines:
        raise EmptyFile(f"{path}: no header row")
    _, header = lines[0]
    body = lines[1:]
    if not body:
        raise EmptyFile(f"{path}: no data rows")
    has_rep = len(header) > 1 and header[1].lower() == "replicate"
    first_unit = 2 if has_rep else 1
    labels = header[first_unit:]
    if not labels:
        raise ParseError(f"{path}: no unit columns", 1, None)

    reps = {}
    for lineno, row in body:
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} cells, found {len(row)}", lineno, None)
        key = row[1] if has_rep else ""
        t = _parse_float(row[0], lineno, header[0])
        vals = [_parse_float(c, lineno, header[first_unit + m]) for m, c in enumerate(row[first_unit:])]
        reps.setdefault(key, ([], [], []))
        reps[key][0].append(t)
        reps[key][1].append(vals)
        reps[key][2].append(lineno)

    times = None
    blocks = []
    for key, (t, vals, linenos) in reps.items():
        t = np.array(t)
        bad = np.nonzero(np.diff(t) <= 0)[0]
        if bad.size:
            raise NonMonotoneTime(f"time is not strictly increasing at row {linenos[bad[0] + 1]}")
        if times is None:
            times = t
        elif t.shape != times.shape or not np.array_equal(t, times):
            raise DataError(f"replicate {key!r} has a different time column from the first replicate")
        blocks.append(np.array(vals).T)  # (units, r_src)
    if times.size < 2:
        raise DataError("need at least two time points")

    values = np.stack(blocks)
    uniform = _is_uniform(times)
    if target_grid is None:
        grid = grid_from_times(times)
        if uniform:
            return CurveSet(grid, values, labels, False)
    else:
        grid = target_grid
        if uniform and times.size == grid.r and np.allclose(times, grid.points, rtol=0, atol=1e-12 * (grid.b - grid.a)):
            return CurveSet(grid, values, labels, False)
    tgt = grid.points
    out = np.empty(values.shape[:2] + (grid.r,))
    for i in range(values.shape[0]):
        for k in range(values.shape[1]):
            out[i, k] = np.interp(tgt, times, values[i, k])
    return CurveSet(grid, out, labels, True)


@dataclass
class UnitMeta:
    group: str
    covariate: float


def read_meta(path):
    """Read the companion unit file with columns ``unit, group, covariate``.

    Returns ``{unit: UnitMeta}`` in file order.
    """
    lines = list(_data_lines(path))
    if not lines:
        raise EmptyFile(f"{path}: empty metadata file")
    _, header = lines[0]
    lower = [h.lower() for h in header]
    missing = [c for c in ("unit", "group", "covariate") if c not in lower]
    if missing:
        raise ParseError(f"{path}: missing columns {missing}", 1, None)
    iu, ig, ic = (lower.index(c) for c in ("unit", "group", "covariate"))
    meta = {}
    for lineno, row in lines[1:]:
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} cells, found {len(row)}", lineno, None)
        if row[iu] in meta:
            raise ParseError(f"row {lineno}: duplicate unit {row[iu]!r}", lineno, header[iu])
        meta[row[iu]] = UnitMeta(row[ig], _parse_float(row[ic], lineno, header[ic]))
    if not meta:
        raise EmptyFile(f"{path}: no metadata rows")
    return meta


def layout_for(meta, labels, groups=None):
    """GroupLayout aligned with the curve file's unit order."""
    absent = [u for u in labels if u not in meta]
    if absent:
        raise DataError(f"units without metadata: {absent}")
    return GroupLayout([meta[u].group for u in labels], [meta[u].covariate for u in labels], list(groups or []))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_table(path, header, rows, meta=None):
    """Write a comma-delimited table with a ``# key: value`` comment header.

    ``path`` may also be an open text stream. The version is always
    recorded; ``meta`` adds further entries in order.
    """
    if hasattr(path, "write"):
        _write(path, header, rows, meta)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write(fh, header, rows, meta)


def _write(fh, header, rows, meta):
    for k, v in {"version": __version__, **(meta or {})}.items():
        fh.write(f"# {k}: {_fmt(v)}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def read_table(path):
    """Inverse of :func:`write_table`: ``(meta, header, rows)`` with cells as strings."""
    meta, rows = {}, []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition(": ")
                meta[k] = v
            else:
                rows.append(next(csv.reader([line])))
    if not rows:
        raise EmptyFile(f"{path}: no header row")
    return meta, rows[0], rows[1:]
