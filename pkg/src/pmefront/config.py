"""Plain-text run configuration.

Grammar: one ``key = value`` per line under ``[section]`` headers; ``#``
and ``;`` start comments. Sections: reaction, flux, grid, solver, front,
experiment. Lists are comma separated, extents are ``lo:hi`` pairs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .reaction import DomainError, ReactionSpec, balanced_a

SECTIONS = ("reaction", "flux", "grid", "solver", "front", "experiment")


class ConfigError(ValueError):
    """Syntax or semantic error, located by line number and/or key."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


# --- value converters --------------------------------------------------------

def _float(text):
    val = float(text)
    if not math.isfinite(val):
        raise ValueError("must be finite")
    return val


def _int(text):
    return int(text)


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text


def _floats(text):
    return tuple(_float(t) for t in text.split(",") if t.strip())


def _extents(text):
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"extent {part.strip()!r} is not lo:hi")
        out.append((_float(lo), _float(hi)))
    return tuple(out)


def _ints(text):
    return tuple(_int(t) for t in text.split(",") if t.strip())


def _a_value(text):
    return None if text.lower() == "auto" else _float(text)


SCHEMA = {
    "reaction": {"m": _float, "k": _float, "alpha0": _float, "alpha1": _float,
                 "a": _a_value, "amplitude": _float},
    "flux": {"kind": _str, "sigma": _float, "sigma_left": _float, "sigma_right": _float},
    "grid": {"geometry": _str, "extents": _extents, "cells": _ints, "h": _float,
             "h_factor": _float, "N": _int},
    "solver": {"epsilon": _float, "t_end": _float, "cfl_safety": _float, "snapshots": _floats,
               "initial": _str, "radius": _float, "profile_nodes": _int},
    "front": {"kind": _str, "R0": _float, "N": _int, "mobility": _float, "convention": _str,
              "t_end": _float, "snapshots": _floats, "g_left": _float, "g_right": _float,
              "divide_by_D": _bool, "nodes": _int, "length": _float, "q1": _float, "q2": _float,
              "perturbation": _float, "safety": _float},
    "experiment": {"scenario": _str, "epsilons": _floats, "h_factor": _float,
                   "comparison_times": _floats, "radius": _float, "domain": _float, "N": _int,
                   "length": _float, "sigma_left": _float, "sigma_right": _float,
                   "convention": _str, "divide_by_D": _bool, "margin_factor": _float,
                   "cfl_safety": _float, "workers": _int},
}

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")
_HEADER = re.compile(r"^\s*\[\s*([A-Za-z_]+)\s*\]\s*$")


@dataclass
class RawConfig:
    """Parsed but not yet interpreted values, with the line each came from."""

    values: dict = field(default_factory=dict)    # section -> key -> value
    lines: dict = field(default_factory=dict)     # (section, key) -> line number

    def get(self, section, key, default=None):
        return self.values.get(section, {}).get(key, default)

    def has(self, section, key=None) -> bool:
        if key is None:
            return section in self.values
        return key in self.values.get(section, {})

    def line_of(self, section, key):
        return self.lines.get((section, key))


def parse_text(text: str) -> RawConfig:
    raw = RawConfig()
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = re.split(r"[#;]", line, maxsplit=1)[0].strip()
        if not stripped:
            continue
        head = _HEADER.match(stripped)
        if head:
            section = head.group(1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            raw.values.setdefault(section, {})
            continue
        kv = _LINE.match(stripped)
        if not kv:
            raise ConfigError(f"expected 'key = value' or '[section]', got {stripped!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno, kv.group(1))
        key, text_val = kv.groups()
        convert = SCHEMA[section].get(key)
        if convert is None:
            raise ConfigError(f"unknown key in [{section}]", lineno, key)
        if key in raw.values[section]:
            raise ConfigError("duplicate key", lineno, key)
        if not text_val:
            raise ConfigError("empty value", lineno, key)
        try:
            raw.values[section][key] = convert(text_val)
        except ValueError as exc:
            raise ConfigError(f"bad value {text_val!r} ({exc})", lineno, key) from None
        raw.lines[(section, key)] = lineno
    return raw


# --- typed sections ------------------------------------------------------------

@dataclass(frozen=True)
class FluxSection:
    kind: str = "zero"          # zero | uniform | walls
    sigma: float = 0.0
    sigma_left: float = 0.0
    sigma_right: float = 0.0


@dataclass(frozen=True)
class GridSection:
    geometry: str = "line"
    extents: tuple = ((-1.0, 1.0),)
    cells: Optional[tuple] = None
    h: Optional[float] = None
    h_factor: Optional[float] = None
    N: int = 2


@dataclass(frozen=True)
class SolverSection:
    epsilon: Optional[float] = None
    t_end: float = 1.0
    cfl_safety: float = 0.4
    snapshots: tuple = ()
    initial: str = "profile"    # profile | step
    radius: float = 0.5
    profile_nodes: int = 1024


@dataclass(frozen=True)
class FrontSection:
    kind: str = "radial"        # radial | graph
    R0: float = 1.0
    N: int = 2
    mobility: Optional[float] = None   # default: B/A of the reaction
    convention: str = "derived"
    t_end: float = 0.1
    snapshots: tuple = ()
    g_left: float = 0.0
    g_right: float = 0.0
    divide_by_D: bool = True
    nodes: int = 65
    length: float = 1.0
    q1: float = 0.0
    q2: float = 0.0
    perturbation: float = 0.0
    safety: float = 0.4


@dataclass(frozen=True)
class Config:
    reaction: ReactionSpec
    flux: FluxSection
    grid: GridSection
    solver: SolverSection
    front: FrontSection
    experiment: dict
    raw: RawConfig = field(compare=False, repr=False, default_factory=RawConfig)

    def require(self, section: str, key: str):
        """Value of a key the current subcommand cannot do without."""
        if not self.raw.has(section, key):
            raise ConfigError(f"missing required key [{section}] {key}", key=key)
        return self.raw.get(section, key)


def _section(cls, raw: RawConfig, name: str):
    vals = raw.values.get(name, {})
    known = {f.name for f in fields(cls)}
    return replace(cls(), **{k: v for k, v in vals.items() if k in known})


def _semantic(raw: RawConfig, section: str, key: str, ok: bool, message: str):
    if not ok:
        raise ConfigError(message, raw.line_of(section, key), key)


def _reaction(raw: RawConfig) -> ReactionSpec:
    vals = dict(raw.values.get("reaction", {}))
    m, a0, a1 = vals.get("m", 1.0), vals.get("alpha0", 1.0), vals.get("alpha1", 1.0)
    for key, val, lo in (("m", m, 1.0), ("k", vals.get("k", 1.0), 1.0), ("alpha0", a0, 0.0),
                         ("alpha1", a1, 0.0)):
        _semantic(raw, "reaction", key, val >= lo, f"must be >= {lo:g}")
    a = vals.pop("a", None)
    if a is None:
        a = balanced_a(m, a0, a1)
    try:
        return ReactionSpec(**{**vals, "a": a})
    except DomainError as exc:
        key = "a" if "a must" in str(exc) else "amplitude"
        raise ConfigError(str(exc), raw.line_of("reaction", key), key) from None


def parse_config(text: str) -> Config:
    """Parse and validate a configuration; raises ConfigError."""
    raw = parse_text(text)
    spec = _reaction(raw)
    flux = _section(FluxSection, raw, "flux")
    _semantic(raw, "flux", "kind", flux.kind in ("zero", "uniform", "walls"),
              "kind must be zero, uniform or walls")
    grid = _section(GridSection, raw, "grid")
    _semantic(raw, "grid", "geometry", grid.geometry in ("line", "radial", "rectangle"),
              "geometry must be line, radial or rectangle")
    naxes = 2 if grid.geometry == "rectangle" else 1
    _semantic(raw, "grid", "extents", len(grid.extents) == naxes, f"need {naxes} lo:hi pair(s)")
    _semantic(raw, "grid", "extents", all(hi > lo for lo, hi in grid.extents), "need lo < hi")
    if grid.cells is not None:
        _semantic(raw, "grid", "cells", len(grid.cells) == naxes and min(grid.cells) >= 2,
                  f"need {naxes} count(s) >= 2")
    for key in ("h", "h_factor"):
        val = getattr(grid, key)
        _semantic(raw, "grid", key, val is None or val > 0, "must be positive")
    _semantic(raw, "grid", "N", grid.N >= 2, "must be >= 2")

    solver = _section(SolverSection, raw, "solver")
    _semantic(raw, "solver", "epsilon", solver.epsilon is None or solver.epsilon > 0, "epsilon must be > 0")
    _semantic(raw, "solver", "t_end", solver.t_end > 0, "must be > 0")
    _semantic(raw, "solver", "cfl_safety", 0 < solver.cfl_safety <= 1, "must lie in (0, 1]")
    _semantic(raw, "solver", "initial", solver.initial in ("profile", "step"), "must be profile or step")
    _semantic(raw, "solver", "snapshots", all(0 <= t <= solver.t_end for t in solver.snapshots),
              "snapshot times must lie in [0, t_end]")

    front = _section(FrontSection, raw, "front")
    _semantic(raw, "front", "kind", front.kind in ("radial", "graph"), "must be radial or graph")
    _semantic(raw, "front", "convention", front.convention in ("derived", "printed"),
              "must be derived or printed")
    _semantic(raw, "front", "R0", front.R0 > 0, "must be > 0")
    _semantic(raw, "front", "nodes", front.nodes >= 3, "must be >= 3")
    _semantic(raw, "front", "length", front.length > 0, "must be > 0")

    experiment = dict(raw.values.get("experiment", {}))
    if "epsilons" in experiment:
        eps = experiment["epsilons"]
        _semantic(raw, "experiment", "epsilons",
                  len(eps) > 0 and min(eps) > 0 and all(b < a for a, b in zip(eps, eps[1:])),
                  "epsilons must be positive and strictly decreasing")
    return Config(spec, flux, grid, solver, front, experiment, raw)


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
