"""CSV and field-dump emission.

Floats are written with 17 significant digits, so every value re-parses
to the same double.

Column layouts:
    interface (line/radial): time, position
    interface (rectangle):   time, polyline, x, y
    radial front states:     t, R
    graph front states:      t, x, w
    convergence report:      scenario, epsilon, time, hausdorff, far_field, alternative, verdict
    constants:               name, quadrature, profile, rel_diff
    bistable report:         check, passed, value, detail
    profile table:           u, y
"""

from __future__ import annotations

import csv
import math
import os
from numbers import Real

import numpy as np

from .front import GraphFrontState, RadialFrontState
from .harness import ConvergenceReport
from .levelset import InterfaceCurve
from .pde import Field, Grid
from .profile import FrontConstants, ProfileTable
from .reaction import BistableReport


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, Real) and not isinstance(value, (int, np.integer)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path):
    """(header, rows) with numeric cells converted to float."""
    def conv(cell):
        try:
            return float(cell)
        except ValueError:
            return cell

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[conv(c) for c in row] for row in reader]


def _interface_rows(curves):
    curves = list(curves)
    if curves and curves[0].geometry == "rectangle":
        header = ["time", "polyline", "x", "y"]
        rows = [(c.time, i, p[0], p[1]) for c in curves for i, poly in enumerate(c.points) for p in poly]
    else:
        header = ["time", "position"]
        rows = [(c.time, x) for c in curves for x in c.vertices()]
    return header, rows


def emit_csv(obj, path) -> None:
    """Write a report, curve(s), front states, constants or profile as CSV."""
    if isinstance(obj, ConvergenceReport):
        header = ["scenario", "epsilon", "time", "hausdorff", "far_field", "alternative", "verdict"]
        rows = [(r.scenario, r.epsilon, r.time, r.hausdorff, r.far_field, r.alternative, r.verdict)
                for r in obj.rows]
    elif isinstance(obj, InterfaceCurve):
        header, rows = _interface_rows([obj])
    elif isinstance(obj, Field):
        raise TypeError("fields are written with write_field")
    elif isinstance(obj, ProfileTable):
        header, rows = ["u", "y"], zip(obj.u_grid, obj.y_of_u)
    elif isinstance(obj, BistableReport):
        header = ["check", "passed", "value", "detail"]
        rows = [(c.name, c.passed, c.value, c.detail) for c in obj.checks]
    elif isinstance(obj, tuple) and len(obj) == 2 and all(isinstance(c, FrontConstants) for c in obj):
        quad, prof = obj
        header = ["name", "quadrature", "profile", "rel_diff"]
        rows = [(n, getattr(quad, n), getattr(prof, n),
                 abs(getattr(quad, n) - getattr(prof, n)) / abs(getattr(quad, n)))
                for n in ("A", "B", "C", "D")]
    elif isinstance(obj, FrontConstants):
        header, rows = ["name", "value"], [(n, getattr(obj, n)) for n in ("A", "B", "C", "D")]
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if items and all(isinstance(s, RadialFrontState) for s in items):
            header, rows = ["t", "R"], [(s.t, s.R) for s in items]
        elif items and all(isinstance(s, GraphFrontState) for s in items):
            header = ["t", "x", "w"]
            rows = [(s.t, x, w) for s in items for x, w in zip(s.x, s.w)]
        elif all(isinstance(c, InterfaceCurve) for c in items):
            header, rows = _interface_rows(items)
        else:
            raise TypeError("unsupported list contents")
    else:
        raise TypeError(f"cannot emit {type(obj).__name__} as CSV")
    write_csv(path, header, rows)


def write_field(field: Field, grid: Grid, path) -> None:
    """Text header (geometry, extents, counts, time) then row-major values, one per line."""
    extents = " ".join(f"{fmt(lo)}:{fmt(hi)}" for lo, hi in grid.extents)
    values = np.asarray(field.values, dtype=float).reshape(grid.shape)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"geometry {grid.geometry}\n")
        fh.write(f"dimension {grid.dimension}\n")
        fh.write(f"extents {extents}\n")
        fh.write(f"counts {' '.join(str(n) for n in grid.counts)}\n")
        fh.write(f"time {fmt(field.time)}\n")
        fh.write("values\n")
        for v in values.ravel(order="C"):
            fh.write(f"{v:.17g}\n")


def read_field(path):
    """Inverse of write_field: (Field, Grid)."""
    with open(path, encoding="utf-8") as fh:
        head = {}
        for line in fh:
            line = line.strip()
            if line == "values":
                break
            key, _, rest = line.partition(" ")
            head[key] = rest
        values = np.array([float(v) for v in fh.read().split()])
    extents = tuple(tuple(float(x) for x in pair.split(":")) for pair in head["extents"].split())
    counts = tuple(int(n) for n in head["counts"].split())
    grid = Grid(head["geometry"], extents, counts, int(head["dimension"]))
    if values.size != math.prod(counts):
        raise ValueError(f"{path}: expected {math.prod(counts)} values, found {values.size}")
    return Field(values.reshape(counts), float(head["time"])), grid


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path
