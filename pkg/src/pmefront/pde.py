"""Explicit finite-difference solver for the epsilon-problem

    u_t = Lap(u^m) + q . grad(u^k) + f(u) / eps^2,    d(u^m)/dnu = G(x, t, u) / eps,

on a line, a radially symmetric ball, or a rectangle. Values live at cell
centers; boundary fluxes enter through ghost cells with
(v_ghost - v_inside) / h = G / eps, v = u^m.

The scheme is monotone under ``stable_dt`` (forward Euler, second
differences of v, first-order upwinding of u^k), which is what the
maximum/comparison-principle tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .reaction import BoundaryFluxSpec, ReactionSpec, eval_df

GEOMETRIES = ("line", "radial", "rectangle")


class InstabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Grid:
    """Cell-centered grid.

    ``extents`` holds one (lo, hi) pair per axis. For the radial geometry
    the single axis is r in [0, R] and ``dimension`` is the ambient N.
    """

    geometry: str
    extents: tuple
    counts: tuple
    dimension: int = 1

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if len(self.extents) != len(self.counts):
            raise ValueError("extents and counts must have one entry per axis")
        if any(n < 2 for n in self.counts):
            raise ValueError("need at least 2 cells per axis")
        if self.geometry == "radial" and (self.extents[0][0] != 0.0 or self.dimension < 2):
            raise ValueError("radial grid starts at r = 0 and needs dimension >= 2")

    @classmethod
    def line(cls, x0: float, x1: float, n: int) -> "Grid":
        return cls("line", ((float(x0), float(x1)),), (int(n),), 1)

    @classmethod
    def radial(cls, radius: float, n: int, N: int = 2) -> "Grid":
        return cls("radial", ((0.0, float(radius)),), (int(n),), int(N))

    @classmethod
    def rectangle(cls, xext, yext, counts) -> "Grid":
        return cls("rectangle", (tuple(map(float, xext)), tuple(map(float, yext))),
                   tuple(int(c) for c in counts), 2)

    @classmethod
    def with_spacing(cls, geometry: str, extents, h: float, dimension: int = 2) -> "Grid":
        """Grid whose cell counts give spacing as close to ``h`` as possible."""
        counts = tuple(max(2, int(round((hi - lo) / h))) for lo, hi in extents)
        dim = dimension if geometry == "radial" else len(extents)
        return cls(geometry, tuple(tuple(map(float, e)) for e in extents), counts, dim)

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.counts))

    @property
    def h(self) -> float:
        return min(self.spacing)

    @property
    def shape(self) -> tuple:
        return tuple(self.counts)

    def centers(self) -> tuple:
        return tuple(lo + (np.arange(n) + 0.5) * d
                     for (lo, _), n, d in zip(self.extents, self.counts, self.spacing))

    def mesh(self) -> tuple:
        return tuple(np.meshgrid(*self.centers(), indexing="ij"))

    def cell_volumes(self) -> np.ndarray:
        if self.geometry == "radial":
            h, N = self.spacing[0], self.dimension
            faces = np.arange(self.counts[0] + 1) * h
            return (faces[1:]**N - faces[:-1]**N) / N
        return np.full(self.shape, float(np.prod(self.spacing)))

    @property
    def stencil_dim(self) -> float:
        """Sum over axes of (h_min / h_i)^2, times N at the radial center."""
        if self.geometry == "radial":
            return float(self.dimension)
        return float(sum((self.h / d)**2 for d in self.spacing))


@dataclass
class Field:
    values: np.ndarray
    time: float = 0.0

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.time)


def zero_flux() -> BoundaryFluxSpec:
    return BoundaryFluxSpec.zero()


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one epsilon-problem.

    ``q_field(coords, t)`` receives the tuple of cell-center coordinate
    arrays and returns one velocity component per axis (radial: q_r).
    """

    epsilon: float
    spec: ReactionSpec
    flux: BoundaryFluxSpec = field(default_factory=zero_flux)
    q_field: Optional[Callable] = None
    cfl_safety: float = 0.4
    t_end: float = 1.0
    reaction_on: bool = True     # False: pure porous-medium diffusion

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


def max_abs_df(spec: ReactionSpec, samples: int = 4001) -> float:
    """max |f'| over [0, 1] by dense sampling; non-finite endpoint values are skipped."""
    u = np.linspace(0.0, 1.0, samples)
    d = np.abs(np.asarray(eval_df(spec, u)))
    return float(np.max(d[np.isfinite(d)]))


class _Operator:
    """Right-hand side of the semi-discrete problem for one (config, grid)."""

    def __init__(self, config: SolverConfig, grid: Grid):
        self.config, self.grid = config, grid
        spec = config.spec
        self.m, self.k = spec.m, spec.k
        self.eps = config.epsilon
        self.max_df = max_abs_df(spec) if config.reaction_on else 0.0
        # linear continuation of f past [0, 1]
        self.df0, self.df1 = (float(d) if math.isfinite(d) else 0.0
                              for d in (eval_df(spec, 0.0), eval_df(spec, 1.0)))
        self.coords = grid.mesh()
        self.has_flux = not config.flux.is_zero()
        self.has_q = config.q_field is not None
        if grid.geometry == "radial":
            h, N, n = grid.spacing[0], grid.dimension, grid.counts[0]
            faces = np.arange(n + 1) * h
            self.area = faces**(N - 1)
            self.vol = grid.cell_volumes()
            self.radius = faces[-1]
        self._boundary_points = self._make_boundary_points()

    def _make_boundary_points(self):
        g = self.grid
        if g.geometry == "line":
            (x0, x1), = g.extents
            return {"left": np.array([[x0]]), "right": np.array([[x1]])}
        if g.geometry == "radial":
            return {"outer": np.array([[g.extents[0][1]]])}
        (x0, x1), (y0, y1) = g.extents
        xc, yc = g.centers()
        return {"left": np.column_stack([np.full_like(yc, x0), yc]),
                "right": np.column_stack([np.full_like(yc, x1), yc]),
                "bottom": np.column_stack([xc, np.full_like(xc, y0)]),
                "top": np.column_stack([xc, np.full_like(xc, y1)])}

    def reaction(self, u):
        spec = self.config.spec
        if not self.config.reaction_on:
            return np.zeros_like(u)
        uc = np.clip(u, 0.0, 1.0)
        val = spec.amplitude * uc**spec.alpha0 * (1.0 - uc)**spec.alpha1 * (uc - spec.a)
        val = val + self.df0 * np.minimum(u, 0.0) + self.df1 * np.maximum(u - 1.0, 0.0)
        return val

    def _power(self, u, p):
        return np.maximum(u, 0.0)**p if p != 1 else u

    def _ghost_offset(self, side, u_edge, t, h):
        if not self.has_flux:
            return np.zeros(np.shape(u_edge))
        g = np.asarray(self.config.flux.G(self._boundary_points[side], t, u_edge), dtype=float)
        return h * g.reshape(np.shape(u_edge)) / self.eps

    def _q(self, t):
        comps = self.config.q_field(self.coords, t)
        return [np.broadcast_to(np.asarray(c, dtype=float), self.grid.shape) for c in comps]

    def rhs(self, u, t):
        g = self.grid
        m, k = self.m, self.k
        v = self._power(u, m)
        out = self.reaction(u) / self.eps**2
        if g.geometry == "line":
            h = g.spacing[0]
            vp = np.empty(u.size + 2)
            vp[1:-1] = v
            vp[0] = v[0] + self._ghost_offset("left", u[:1], t, h)[0]
            vp[-1] = v[-1] + self._ghost_offset("right", u[-1:], t, h)[0]
            out += (vp[2:] - 2.0 * vp[1:-1] + vp[:-2]) / h**2
            if self.has_q:
                out += self._upwind(u, vp, self._q(t)[0], h, axis=0)
        elif g.geometry == "radial":
            h = g.spacing[0]
            vp = np.empty(u.size + 2)
            vp[1:-1] = v
            vp[0] = v[0]
            vp[-1] = v[-1] + self._ghost_offset("outer", u[-1:], t, h)[0]
            flux = self.area[1:] * (vp[2:] - vp[1:-1]) / h
            out += (flux - np.r_[0.0, flux[:-1]]) / self.vol
            if self.has_q:
                out += self._upwind(u, vp, self._q(t)[0], h, axis=0)
        else:
            hx, hy = g.spacing
            vp = np.pad(v, 1, mode="edge")
            if self.has_flux:
                vp[0, 1:-1] += self._ghost_offset("left", u[0, :], t, hx)
                vp[-1, 1:-1] += self._ghost_offset("right", u[-1, :], t, hx)
                vp[1:-1, 0] += self._ghost_offset("bottom", u[:, 0], t, hy)
                vp[1:-1, -1] += self._ghost_offset("top", u[:, -1], t, hy)
            out += (vp[2:, 1:-1] - 2.0 * v + vp[:-2, 1:-1]) / hx**2
            out += (vp[1:-1, 2:] - 2.0 * v + vp[1:-1, :-2]) / hy**2
            if self.has_q:
                qx, qy = self._q(t)
                out += self._upwind(u, vp, qx, hx, axis=0)
                out += self._upwind(u, vp, qy, hy, axis=1)
        return out

    def _upwind(self, u, vp, q, h, axis):
        """q * d(u^k)/dx, differenced on the side the information comes from."""
        m, k = self.m, self.k
        up = np.maximum(vp, 0.0)**(1.0 / m) if m != 1 else vp
        wp = up**k if k != 1 else up
        if vp.ndim == 1:
            fwd = (wp[2:] - wp[1:-1]) / h
            bwd = (wp[1:-1] - wp[:-2]) / h
        elif axis == 0:
            fwd = (wp[2:, 1:-1] - wp[1:-1, 1:-1]) / h
            bwd = (wp[1:-1, 1:-1] - wp[:-2, 1:-1]) / h
        else:
            fwd = (wp[1:-1, 2:] - wp[1:-1, 1:-1]) / h
            bwd = (wp[1:-1, 1:-1] - wp[1:-1, :-2]) / h
        return np.where(q > 0, q * fwd, q * bwd)

    def bounds(self, u, t):
        """(diffusion, reaction, advection) time-step limits, before the safety factor."""
        g, m, k = self.grid, self.m, self.k
        umax = max(float(np.max(u)), 0.0)
        coeff = 2.0 * g.stencil_dim * m * umax**(m - 1)
        diffusion = g.h**2 / coeff if coeff > 0 else math.inf
        reaction = self.eps**2 / self.max_df if self.max_df > 0 else math.inf
        advection = math.inf
        if self.has_q:
            qmax = max(float(np.max(np.abs(c))) for c in self._q(t))
            if qmax > 0:
                advection = g.h / (qmax * k * max(1.0, umax)**(k - 1))
        return diffusion, reaction, advection

    def stable_dt(self, u, t):
        return self.config.cfl_safety * min(self.bounds(u, t))

    def step(self, u, t, dt):
        new = u + dt * self.rhs(u, t)
        if not np.all(np.isfinite(new)):
            d, r, a = self.bounds(u, t)
            raise InstabilityError(
                f"non-finite values at t={t:.6g} with dt={dt:.3e}; limits: diffusion "
                f"h^2/(2 dim m u^(m-1))={d:.3e}, reaction eps^2/max|f'|={r:.3e}, "
                f"advection h/(k max|q|)={a:.3e}")
        return new


def stable_dt(field: Field, config: SolverConfig, grid: Grid) -> float:
    """cfl_safety * min(h^2/(2 dim m max(u)^(m-1)), eps^2/max|f'|, h/(k max|q|))."""
    return _Operator(config, grid).stable_dt(field.values, field.time)


def step_explicit(field: Field, config: SolverConfig, grid: Grid, dt: float | None = None) -> Field:
    """One forward-Euler step; ``dt`` defaults to ``stable_dt``."""
    op = _Operator(config, grid)
    if dt is None:
        dt = op.stable_dt(field.values, field.time)
    return Field(op.step(field.values, field.time, dt), field.time + dt)


def run(initial: Field, config: SolverConfig, grid: Grid, snapshot_times=None,
        callback: Callable | None = None) -> list:
    """March to each snapshot time, clipping the last step to land exactly.

    ``callback(field)`` is invoked after every step when given.
    """
    if snapshot_times is None:
        snapshot_times = [config.t_end]
    times = sorted(float(t) for t in snapshot_times)
    if times and times[0] < initial.time:
        raise ValueError("snapshot times precede the initial time")
    op = _Operator(config, grid)
    u, t = np.array(initial.values, dtype=float), initial.time
    out = []
    for target in times:
        while t < target:
            dt = op.stable_dt(u, t)
            last = t + dt >= target * (1 - 1e-14)
            if last:
                dt = target - t
            u = op.step(u, t, dt)
            t = target if last else t + dt
            if callback is not None:
                callback(Field(u, t))
        out.append(Field(u.copy(), t))
    return out


def mass(field: Field, grid: Grid) -> float:
    return float(np.sum(field.values * grid.cell_volumes()))
