"""Standing-wave profile of (u^m)'' + f(u) = 0 and the front constants.

The profile Phi is never shot forward as an ODE (the equation is degenerate
at u = 0 and u = 1). Instead the inverse function

    y(u) = int_a^u s^(m-1) sqrt(m/2) / sqrt(-F(s)) ds,   y(a) = 0,

is tabulated on nodes uniform in the mapped coordinate

    s(u) = log(u / (1 - u)) + (2u - 1) / w,

which is logarithmic near both endpoints and linear around the middle
(``w`` is the cluster width). In ``s`` the table is smooth out to the
truncation points u ~ 1e-8 and 1 - 1e-8, so fourth-order finite differences
and Simpson's rule stay accurate all the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

from .reaction import (ReactionSpec, eval_df, neg_potential, tail_potential,
                       validate_bistable)

U_MIN = 1e-8
GL_ORDER = 12


class PreconditionError(ValueError):
    pass


class QuadratureError(ArithmeticError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class DecayClass:
    side: str                 # "lower" | "upper"
    endpoint_finite: bool
    kind: str                 # "algebraic" | "exponential" | "algebraic-in-y"
    exponent_or_rate: float   # as for unit leading coefficient of f
    coefficient_scale: float = 1.0  # actual rate = exponent_or_rate * scale (exponential kind)

    @property
    def rate(self) -> float:
        if self.kind == "exponential":
            return self.exponent_or_rate * self.coefficient_scale
        return self.exponent_or_rate


def classify_decay(spec: ReactionSpec) -> tuple[DecayClass, DecayClass]:
    """Endpoint behaviour of the profile on each side.

    Lower side splits at alpha0 vs m, upper side at alpha1 vs 1. The
    exponential rates 1/m and 1/sqrt(m) hold for f ~ -u^alpha0 and
    f ~ (1-u)^alpha1 with unit coefficients; ``coefficient_scale`` carries
    the square root of the actual leading coefficient.
    """
    m, a0, a1 = spec.m, spec.alpha0, spec.alpha1
    if a0 < m:
        lower = DecayClass("lower", True, "algebraic", 2.0 / (m - a0))
    elif a0 == m:
        lower = DecayClass("lower", False, "exponential", 1.0 / m,
                           math.sqrt(spec.lower_coefficient()))
    else:
        lower = DecayClass("lower", False, "algebraic-in-y", 2.0 / (m - a0))
    if a1 < 1:
        upper = DecayClass("upper", True, "algebraic", 2.0 / (1.0 - a1))
    elif a1 == 1:
        upper = DecayClass("upper", False, "exponential", 1.0 / math.sqrt(m),
                           math.sqrt(spec.upper_coefficient()))
    else:
        upper = DecayClass("upper", False, "algebraic-in-y", 2.0 / (1.0 - a1))
    return lower, upper


# --- mapped coordinate ------------------------------------------------

def map_s(u, w):
    """s(u) = logit(u) + (2u - 1)/w: logarithmic near 0 and 1, linear in the middle."""
    u = np.asarray(u, dtype=float)
    return np.log(u) - np.log1p(-u) + (2.0 * u - 1.0) / w


def map_u(s, w):
    """Inverse of ``map_s`` by bisection on t = logit(u) followed by Newton polishing."""
    s = np.asarray(s, dtype=float)
    lo = s - 1.0 / w - 1.0
    hi = s + 1.0 / w + 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        g = mid + np.tanh(0.5 * mid) / w - s
        lo = np.where(g < 0, mid, lo)
        hi = np.where(g < 0, hi, mid)
    t = 0.5 * (lo + hi)
    for _ in range(2):
        u = special.expit(t)
        t = t - (t + np.tanh(0.5 * t) / w - s) / (1.0 + 2.0 * u * (1.0 - u) / w)
    return special.expit(t)


def du_ds(u, w):
    u = np.asarray(u, dtype=float)
    return 1.0 / (1.0 / (u * (1.0 - u)) + 2.0 / w)


def _stencil(offsets) -> np.ndarray:
    """First-derivative weights on unit spacing for the given integer offsets."""
    offs = np.asarray(offsets, dtype=float)
    vander = offs[None, :] ** np.arange(offs.size)[:, None]
    rhs = np.zeros(offs.size)
    rhs[1] = 1.0
    return np.linalg.solve(vander, rhs)


_CENTRAL = _stencil(range(-3, 4))
_EDGE = [_stencil(np.arange(7) - i) for i in range(3)]


def d_uniform(f, h):
    """Sixth-order first derivative of samples on a uniform grid."""
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 7:
        raise ValueError("need at least 7 samples")
    d = np.zeros(n)
    for j, wj in enumerate(_CENTRAL):
        d[3:-3] += wj * f[j:n - 6 + j]
    for i, wts in enumerate(_EDGE):
        d[i] = wts @ f[:7]
        d[n - 1 - i] = -(wts @ f[::-1][:7])
    return d / h


@dataclass(frozen=True)
class ProfileTable:
    """Standing wave sampled as y(u).

    Nodes are uniform in ``map_s`` with spacing ``ds``; ``split`` is the
    index of the node u = a, where y = 0.
    """

    u_grid: np.ndarray
    y_of_u: np.ndarray
    y_star: float            # -inf when the lower endpoint is infinite
    y_star_upper: float      # +inf when the upper endpoint is infinite
    spec: ReactionSpec
    split: int
    cluster_width: float
    ds: float

    def du_ds(self) -> np.ndarray:
        return du_ds(self.u_grid, self.cluster_width)

    def dy_ds(self) -> np.ndarray:
        return d_uniform(self.y_of_u, self.ds)

    def dy_du(self) -> np.ndarray:
        """Finite-difference dy/du at every node."""
        return self.dy_ds() / self.du_ds()

    def check_monotone(self):
        if not np.all(np.diff(self.y_of_u) > 0) or not np.all(np.diff(self.u_grid) > 0):
            raise PreconditionError("profile table is not strictly increasing")

    def ode_residual(self) -> np.ndarray:
        """dy/du * sqrt(2/m) sqrt(-F) / u^(m-1) - 1 at every node."""
        m = self.spec.m
        u = self.u_grid
        return self.dy_du() * math.sqrt(2.0 / m) * np.sqrt(neg_potential(self.spec, u)) / u**(m - 1) - 1.0

    def interpolant(self):
        """Monotone interpolant xi -> Phi(xi), clamped to [0, 1] outside the table."""
        y, u = self.y_of_u, self.u_grid
        if math.isfinite(self.y_star):
            y, u = np.r_[self.y_star, y], np.r_[0.0, u]
        if math.isfinite(self.y_star_upper):
            y, u = np.r_[y, self.y_star_upper], np.r_[u, 1.0]
        pchip = interpolate.PchipInterpolator(y, u, extrapolate=False)
        ylo, yhi = y[0], y[-1]

        def phi(xi):
            xi = np.asarray(xi, dtype=float)
            val = pchip(np.clip(xi, ylo, yhi))
            return np.where(xi <= ylo, 0.0, np.where(xi >= yhi, 1.0, val))

        return phi

    def to_text(self) -> str:
        lower, upper = classify_decay(self.spec)
        head = [f"# {line}" for line in self.spec.to_text().splitlines()]
        head += [f"# y_star={self.y_star!r}", f"# y_star_upper={self.y_star_upper!r}",
                 f"# lower={lower.kind} finite={lower.endpoint_finite} exponent_or_rate={lower.exponent_or_rate!r}",
                 f"# upper={upper.kind} finite={upper.endpoint_finite} exponent_or_rate={upper.exponent_or_rate!r}",
                 "# u y"]
        rows = [f"{u:.17g} {y:.17g}" for u, y in zip(self.u_grid, self.y_of_u)]
        return "\n".join(head + rows) + "\n"


def _segment_integrals(h_of_u, s_nodes, w):
    """int over each [s_i, s_i+1] of h(u(s)) du/ds ds, Gauss-Legendre."""
    x, wts = np.polynomial.legendre.leggauss(GL_ORDER)
    mid = 0.5 * (s_nodes[1:] + s_nodes[:-1])
    half = 0.5 * (s_nodes[1:] - s_nodes[:-1])
    u = map_u(mid[:, None] + half[:, None] * x[None, :], w)
    return half * np.sum(wts[None, :] * h_of_u(u) * du_ds(u, w), axis=1)


def _floor_quad(fun, lo, hi, wvar):
    val, err = integrate.quad(fun, lo, hi, weight="alg", wvar=wvar)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureError("endpoint integral failed", err)
    return val


def compute_profile(spec: ReactionSpec, n: int = 1024, cluster_width: float = 0.02,
                    u_min: float = U_MIN) -> ProfileTable:
    """Tabulate the standing wave of a balanced ``spec`` on ``n`` nodes.

    The first and last nodes sit within one grid step (in the mapped
    coordinate) of ``u_min`` and ``1 - u_min``.
    """
    report = validate_bistable(spec)
    if not report.check("balance").passed:
        raise PreconditionError(f"spec is not balanced: {report.check('balance').value:.3e}")
    if n < 16:
        raise ValueError("n must be at least 16")
    m, a, w = spec.m, spec.a, cluster_width
    sqm2 = math.sqrt(m / 2.0)

    def h_of_u(u):
        return u**(m - 1) * sqm2 / np.sqrt(neg_potential(spec, u))

    s_min, s_a, s_max = map_s(np.array([u_min, a, 1.0 - u_min]), w)
    ds = (s_max - s_min) / (n - 1)
    split = int(round((s_a - s_min) / ds))
    s_nodes = s_a + ds * (np.arange(n) - split)
    u_grid = map_u(s_nodes, w)
    u_grid[split] = a

    seg = _segment_integrals(h_of_u, s_nodes, w)
    y_grid = np.empty(n)
    y_grid[split] = 0.0
    y_grid[split + 1:] = np.cumsum(seg[split:])
    y_grid[:split] = -np.cumsum(seg[:split][::-1])[::-1]
    if not np.all(np.isfinite(y_grid)):
        raise QuadratureError("non-finite profile values", float("inf"))

    lower, upper = classify_decay(spec)
    u_lo, u_hi = u_grid[0], u_grid[-1]
    y_star = -math.inf
    if lower.endpoint_finite:
        # h ~ u^(beta-1) at 0; the weight carries the singular factor
        beta = (m - spec.alpha0) / 2.0
        floor = u_lo * 1e-6
        y_star = float(y_grid[0] - _floor_quad(
            lambda u: h_of_u(max(u, floor)) * max(u, floor)**(1.0 - beta), 0.0, u_lo, (beta - 1.0, 0.0)))
    y_star_upper = math.inf
    if upper.endpoint_finite:
        # integrate in v = 1 - u so the tail potential keeps relative accuracy
        gam = (spec.alpha1 + 1.0) / 2.0
        v_hi = 1.0 - u_hi
        floor = v_hi * 1e-6

        def h_tail(v):
            v = max(v, floor)
            return (1.0 - v)**(m - 1) * sqm2 / math.sqrt(tail_potential(spec, v)) * v**gam

        y_star_upper = float(y_grid[-1] + _floor_quad(h_tail, 0.0, v_hi, (-gam, 0.0)))
    table = ProfileTable(u_grid, y_grid, y_star, y_star_upper, spec, split, w, ds)
    table.check_monotone()
    return table


@dataclass(frozen=True)
class FrontConstants:
    A: float
    B: float
    C: float
    D: float

    @property
    def mobility(self) -> float:
        return self.B / self.A

    @property
    def drift_gain(self) -> float:
        return self.C / self.A

    def contact_ratio(self, g: float) -> float:
        return g / self.D

    def to_text(self) -> str:
        vals = dict(A=self.A, B=self.B, C=self.C, D=self.D,
                    mobility=self.mobility, drift_gain=self.drift_gain)
        return "\n".join(f"{k}={v:.17g}" for k, v in vals.items()) + "\n"


def constants_by_quadrature(spec: ReactionSpec) -> FrontConstants:
    """A, B, C, D from u-space integrals of sqrt(-F).

    A = sqrt(2/m) I(0), B = m sqrt(2/m) I(m-1), C = k sqrt(2/m) I(k-1), D = m A,
    where I(p) = int_0^1 u^p sqrt(-F(u)) du.
    """
    if not validate_bistable(spec).check("balance").passed:
        raise PreconditionError("spec is not balanced")
    m, k, a = spec.m, spec.k, spec.a

    @lru_cache(maxsize=None)
    def moment(p):
        total = 0.0
        for lo, hi in ((0.0, a), (a, 1.0)):
            val, err = integrate.quad(lambda u: u**p * np.sqrt(neg_potential(spec, u)), lo, hi,
                                      epsabs=1e-14, epsrel=1e-13, limit=400)
            if not math.isfinite(val) or err > 1e-11:
                raise QuadratureError(f"moment {p} did not converge", err)
            total += val
        return total

    r = math.sqrt(2.0 / m)
    A = r * moment(0.0)
    return FrontConstants(A=A, B=m * r * moment(m - 1.0), C=k * r * moment(k - 1.0), D=m * A)


def constants_by_profile(table: ProfileTable) -> FrontConstants:
    """Same constants as xi-space integrals over the tabulated profile.

    J(p) = int u^p Phi_xi^2 dxi is evaluated with Phi_xi from finite
    differences of the table and Simpson's rule in the mapped coordinate.
    """
    table.check_monotone()
    m, k = table.spec.m, table.spec.k
    u = table.u_grid
    # Phi_xi^2 dxi = (du/ds)^2 / (dy/ds) ds
    weight = table.du_ds()**2 / table.dy_ds()

    def moment(p):
        return integrate.simpson(u**p * weight, dx=table.ds)

    A = moment(m - 1.0)
    return FrontConstants(A=A, B=m * moment(2 * m - 2.0), C=k * moment(k + m - 2.0), D=m * A)


def solvability_residual(table: ProfileTable, window=(0.05, 0.95)) -> float:
    """Relative residual of (m Phi^(m-1) Phi_xi)_xi_xi + f'(Phi) Phi_xi = 0.

    All xi-derivatives come from finite differences of the table. The
    maximum over nodes with u in ``window`` is divided by the maximum of
    |f'(Phi) Phi_xi| there.
    """
    spec = table.spec
    u, h = table.u_grid, table.ds
    dyds = table.dy_ds()
    slope = table.du_ds() / dyds
    flux = spec.m * u**(spec.m - 1) * slope
    flux_xi = d_uniform(flux, h) / dyds
    flux_xixi = d_uniform(flux_xi, h) / dyds
    react = np.asarray(eval_df(spec, u)) * slope
    sel = (u >= window[0]) & (u <= window[1])
    return float(np.max(np.abs(flux_xixi + react)[sel]) / np.max(np.abs(react)[sel]))


def empirical_decay(table: ProfileTable, side: str, band=(1e-8, 1e-5)) -> float:
    """Fit the endpoint law of the tabulated profile.

    Returns the algebraic exponent (log-log fit against distance to a finite
    endpoint), the exponential rate (log-linear fit), or the algebraic-in-y
    exponent (log-log fit against |y|), according to ``classify_decay``.
    """
    lower, upper = classify_decay(table.spec)
    cls = lower if side == "lower" else upper
    u, y = table.u_grid, table.y_of_u
    if side == "lower":
        dist_u = u
        dist_y = y - table.y_star if cls.endpoint_finite else -y
    else:
        dist_u = 1.0 - u
        dist_y = table.y_star_upper - y if cls.endpoint_finite else y
    sel = (dist_u >= band[0]) & (dist_u <= band[1])
    if np.count_nonzero(sel) < 3:
        raise ValueError("too few table nodes in the fitting band")
    if cls.kind == "exponential":
        slope = np.polyfit(dist_y[sel], np.log(dist_u[sel]), 1)[0]
        return float(-slope)
    slope = np.polyfit(np.log(dist_y[sel]), np.log(dist_u[sel]), 1)[0]
    return float(slope)
