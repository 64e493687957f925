"""Command-line front end: ``python3 -m pmefront <subcommand> --config run.cfg --out results/``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import front as lim
from .config import Config, ConfigError, load_config, parse_config
from .harness import ExperimentSpec, WallFlux, run_convergence
from .invariants import seed_check
from .levelset import extract_level_set
from .output import emit_csv, ensure_dir, write_csv, write_field
from .pde import Field, Grid, InstabilityError, SolverConfig, mass, run
from .profile import (PreconditionError, QuadratureError, classify_decay, compute_profile,
                      constants_by_profile, constants_by_quadrature)
from .reaction import BoundaryFluxSpec, DomainError, EvaluationError, validate_bistable

log = logging.getLogger("pmefront")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 3
EXIT_INSTABILITY = 4
EXIT_ACCEPTANCE = 5

COMMANDS = ("profile", "constants", "simulate-pde", "simulate-front", "converge", "validate")


def _out(args, name):
    return os.path.join(args.out, name)


def cmd_profile(cfg: Config, args) -> int:
    table = compute_profile(cfg.reaction, n=cfg.solver.profile_nodes)
    with open(_out(args, "profile.txt"), "w", encoding="utf-8") as fh:
        fh.write(table.to_text())
    emit_csv(table, _out(args, "profile.csv"))
    for d in classify_decay(cfg.reaction):
        print(f"{d.side}: {d.kind} finite={d.endpoint_finite} exponent_or_rate={d.exponent_or_rate:.6g}"
              f" rate={d.rate:.6g}")
    print(f"y_star={table.y_star:.17g} y_star_upper={table.y_star_upper:.17g} nodes={table.u_grid.size}")
    return EXIT_OK


def cmd_constants(cfg: Config, args) -> int:
    quad = constants_by_quadrature(cfg.reaction)
    prof = constants_by_profile(compute_profile(cfg.reaction, n=cfg.solver.profile_nodes))
    emit_csv((quad, prof), _out(args, "constants.csv"))
    print(quad.to_text(), end="")
    worst = max(abs(getattr(quad, n) - getattr(prof, n)) / abs(getattr(quad, n)) for n in "ABCD")
    print(f"dual-oracle max relative difference {worst:.3e}")
    return EXIT_OK


def _flux(cfg: Config, grid: Grid) -> BoundaryFluxSpec:
    fx = cfg.flux
    if fx.kind == "zero":
        return BoundaryFluxSpec.zero()
    if fx.kind == "uniform":
        sigma = fx.sigma
        return BoundaryFluxSpec(lambda x, t, u: sigma * 6.0 * np.asarray(u) * (1.0 - np.asarray(u)),
                                f"uniform sigma={sigma}")
    if grid.geometry == "radial":
        raise ConfigError("flux kind 'walls' needs a line or rectangle grid", key="kind")
    (x0, x1) = grid.extents[0]
    return WallFlux(x0, x1, fx.sigma_left, fx.sigma_right).as_spec()


def build_grid(cfg: Config, epsilon: float) -> Grid:
    g = cfg.grid
    if g.cells is not None:
        return Grid(g.geometry, g.extents, tuple(g.cells), g.N if g.geometry == "radial" else len(g.extents))
    h = g.h if g.h is not None else (g.h_factor or 0.25) * epsilon
    if g.geometry == "radial" and g.extents[0][0] != 0.0:
        raise ConfigError("radial extents must start at 0", key="extents")
    return Grid.with_spacing(g.geometry, g.extents, h, g.N)


def initial_field(cfg: Config, grid: Grid, epsilon: float) -> Field:
    """Profile (or step) across a flat front at x = 0 (line) or a sphere of the given radius."""
    radius = cfg.solver.radius
    coords = grid.mesh()
    if grid.geometry == "line":
        dist = coords[0]
    elif grid.geometry == "radial":
        dist = radius - coords[0]
    else:
        cx = [0.5 * (lo + hi) for lo, hi in grid.extents]
        dist = radius - np.hypot(coords[0] - cx[0], coords[1] - cx[1])
    if cfg.solver.initial == "step":
        return Field(np.where(dist > 0, 1.0, 0.0))
    phi = compute_profile(cfg.reaction).interpolant()
    return Field(phi(dist / epsilon))


def cmd_simulate_pde(cfg: Config, args) -> int:
    eps = cfg.require("solver", "epsilon")
    grid = build_grid(cfg, eps)
    solver = SolverConfig(eps, cfg.reaction, flux=_flux(cfg, grid), cfl_safety=cfg.solver.cfl_safety,
                          t_end=cfg.solver.t_end)
    u0 = initial_field(cfg, grid, eps)
    times = sorted(set(cfg.solver.snapshots) | {cfg.solver.t_end})
    snaps = [u0] + run(u0, solver, grid, [t for t in times if t > 0])
    curves = []
    summary = []
    for i, snap in enumerate(snaps):
        write_field(snap, grid, _out(args, f"field_{i:03d}.txt"))
        curves.append(extract_level_set(snap, grid, cfg.reaction.a))
        summary.append((snap.time, mass(snap, grid), float(snap.values.min()), float(snap.values.max())))
        log.info("t=%.6g mass=%.6g", snap.time, summary[-1][1])
    emit_csv(curves, _out(args, "interface.csv"))
    write_csv(_out(args, "summary.csv"), ["time", "mass", "min", "max"], summary)
    print(f"{len(snaps)} snapshots on a {grid.geometry} grid {grid.counts}, h={grid.h:.4g}")
    return EXIT_OK


def cmd_simulate_front(cfg: Config, args) -> int:
    fr = cfg.front
    consts = constants_by_quadrature(cfg.reaction)
    mobility = fr.mobility if fr.mobility is not None else consts.mobility
    times = sorted(set(fr.snapshots) | {fr.t_end}) if fr.snapshots else list(np.linspace(0.0, fr.t_end, 11))
    if fr.kind == "radial":
        state = lim.RadialFrontState(fr.R0, fr.N, mobility, 0.0, fr.convention)
        states = lim.run_front(state, None, fr.t_end, times)
        print(f"extinction time {state.extinction_time():.17g}")
    else:
        bc = lim.ContactBC(fr.g_left, fr.g_right, consts.D, fr.divide_by_D)
        x = np.linspace(0.0, fr.length, fr.nodes)
        state = lim.GraphFrontState(fr.perturbation * np.cos(math.pi * x / fr.length), fr.length,
                                    mobility, consts.drift_gain, (fr.q1, fr.q2))
        states = lim.run_front(state, bc, fr.t_end, times, fr.safety)
        print(f"final mean height {float(np.mean(states[-1].w)):.17g}")
    emit_csv(states, _out(args, "front.csv"))
    return EXIT_OK


def experiment_from_config(cfg: Config) -> ExperimentSpec:
    return ExperimentSpec(spec=cfg.reaction, **{"scenario": "radial_shrink", **cfg.experiment})


def cmd_converge(cfg: Config, args) -> int:
    try:
        exp = experiment_from_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = run_convergence(exp)
    emit_csv(report, _out(args, "convergence.csv"))
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def cmd_validate(cfg: Config, args) -> int:
    report = validate_bistable(cfg.reaction)
    emit_csv(report, _out(args, "validate.csv"))
    print(report)
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


HANDLERS = {"profile": cmd_profile, "constants": cmd_constants, "simulate-pde": cmd_simulate_pde,
            "simulate-front": cmd_simulate_front, "converge": cmd_converge, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmefront", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key=value configuration file (defaults when omitted)")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--seed-check", action="store_true",
                        help="run the solver invariant suite before the command")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        ensure_dir(args.out)
        if args.seed_check:
            checks = seed_check()
            emit_rows = [(c.name, c.passed, c.value, c.detail) for c in checks]
            write_csv(_out(args, "seed_check.csv"), ["check", "passed", "value", "detail"], emit_rows)
            for c in checks:
                print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} {c.detail}")
            if not all(c.passed for c in checks):
                return EXIT_ACCEPTANCE
        return HANDLERS[args.command](cfg, args)
    except (ConfigError, DomainError, PreconditionError, lim.ContactAngleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, lim.InstabilityError, lim.ExtinctionError, QuadratureError,
            EvaluationError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
