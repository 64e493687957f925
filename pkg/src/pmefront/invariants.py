"""Quick invariant suite for the explicit solver (run by ``--seed-check``).

Every check is deterministic: random initial data come from a fixed seed.
"""

from __future__ import annotations

import math

import numpy as np

from .pde import Field, Grid, SolverConfig, mass, run, stable_dt, step_explicit
from .reaction import Check, ReactionSpec

BOUND_TOL = 1e-12
MASS_RTOL = 1e-10
SEED = 20240611


def barenblatt(x, t, m=2.0, C=1.0):
    """1-D Barenblatt profile of u_t = (u^m)_xx."""
    alpha = 1.0 / (m + 1.0)
    kk = alpha * (m - 1.0) / (2.0 * m)
    xi = np.asarray(x) * t**-alpha
    return t**-alpha * np.maximum(C - kk * xi * xi, 0.0)**(1.0 / (m - 1.0))


def barenblatt_front(t, m=2.0, C=1.0):
    alpha = 1.0 / (m + 1.0)
    kk = alpha * (m - 1.0) / (2.0 * m)
    return math.sqrt(C / kk) * t**alpha


def _grids():
    return [Grid.line(-1.0, 1.0, 80), Grid.radial(1.0, 60, 2), Grid.rectangle((0, 1), (0, 1), (24, 24))]


def max_principle(m: float = 2.0, steps_time: float = 0.02, epsilon: float = 0.05) -> Check:
    """Random data in [0, 1], zero flux: every step stays in [-tol, 1 + tol]."""
    rng = np.random.default_rng(SEED)
    spec = ReactionSpec.balanced(m, 1.0, 1.0)
    lo, hi = math.inf, -math.inf
    for grid in _grids():
        # a third of the cells sit exactly at a stable state
        u0 = rng.uniform(0.0, 1.0, grid.shape)
        u0 = Field(np.where(rng.random(grid.shape) < 1 / 3, np.round(u0), u0))
        extremes = []
        run(u0, SolverConfig(epsilon, spec), grid, [steps_time],
            callback=lambda f: extremes.append((f.values.min(), f.values.max())))
        lo = min(lo, min(e[0] for e in extremes))
        hi = max(hi, max(e[1] for e in extremes))
    ok = bool(lo >= -BOUND_TOL and hi <= 1.0 + BOUND_TOL)
    return Check(f"max_principle_m{m:g}", ok, float(max(-lo, hi - 1.0)), f"min={lo:.3e} max={hi:.17g}")


def mass_conservation(m: float = 2.0, t_end: float = 0.02) -> Check:
    """Pure diffusion with zero flux conserves sum(u * volume)."""
    rng = np.random.default_rng(SEED + 1)
    spec = ReactionSpec.balanced(m, 1.0, 1.0)
    worst = 0.0
    for grid in _grids():
        u0 = Field(rng.uniform(0.0, 1.0, grid.shape))
        m0 = mass(u0, grid)
        end, = run(u0, SolverConfig(1.0, spec, reaction_on=False), grid, [t_end])
        worst = max(worst, abs(mass(end, grid) - m0) / m0)
    return Check(f"mass_conservation_m{m:g}", worst <= MASS_RTOL, worst, "max relative drift")


def run_ordered_pair(lower: Field, upper: Field, config: SolverConfig, grid: Grid, times) -> list:
    """March two data with a shared step (the smaller stable one), returning snapshot pairs.

    The scheme is monotone step by step; with independent step sizes the two
    runs would also differ by time-discretization error, which is not what
    the comparison property is about.
    """
    out = []
    lo, up = lower, upper
    for target in sorted(times):
        while lo.time < target:
            dt = min(stable_dt(lo, config, grid), stable_dt(up, config, grid), target - lo.time)
            lo, up = step_explicit(lo, config, grid, dt), step_explicit(up, config, grid, dt)
            if target - lo.time <= 1e-14 * target:
                lo, up = Field(lo.values, target), Field(up.values, target)
        out.append((lo, up))
    return out


def comparison(m: float = 2.0, t_end: float = 0.02, epsilon: float = 0.05) -> Check:
    """u0 <= v0 pointwise implies u <= v at all later times."""
    rng = np.random.default_rng(SEED + 2)
    spec = ReactionSpec.balanced(m, 1.0, 1.0)
    worst = -math.inf
    for grid in _grids():
        lower = rng.uniform(0.0, 1.0, grid.shape)
        bump = np.where(rng.random(grid.shape) < 0.5, rng.uniform(0.0, 0.3, grid.shape), 0.0)
        upper = np.minimum(lower + bump, 1.0)
        cfg = SolverConfig(epsilon, spec)
        for lb, ub in run_ordered_pair(Field(lower), Field(upper), cfg, grid, [t_end / 2, t_end]):
            worst = max(worst, float(np.max(lb.values - ub.values)))
    return Check(f"comparison_m{m:g}", worst <= BOUND_TOL, worst, "max of u_lower - u_upper")


def finite_propagation(m: float = 2.0, t0: float = 0.05, t1: float = 0.2, n: int = 400,
                       threshold: float = 1e-10, C: float = 0.1) -> Check:
    """Barenblatt data: support stays within the exact front plus two cells."""
    grid = Grid.line(-2.0, 2.0, n)
    x, = grid.centers()
    spec = ReactionSpec.balanced(m, 1.0, 1.0)
    end, = run(Field(barenblatt(x, t0, m, C), t0), SolverConfig(1.0, spec, reaction_on=False), grid, [t1])
    front = barenblatt_front(t1, m, C)
    ahead = np.abs(x) > front + 2.0 * grid.h
    leak = float(np.max(end.values[ahead])) if np.any(ahead) else math.inf
    return Check(f"finite_propagation_m{m:g}", leak <= threshold, leak,
                 f"max u beyond front + 2h (front {front:.4f})")


def seed_check() -> list:
    checks = []
    for m in (1.0, 2.0):
        checks += [max_principle(m), mass_conservation(m), comparison(m)]
    checks.append(finite_propagation(2.0))
    return checks
