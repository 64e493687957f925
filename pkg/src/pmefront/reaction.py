"""Balanced bistable reactions for the porous-medium equation.

The family used throughout the package is

    f(u) = amplitude * u**alpha0 * (1 - u)**alpha1 * (u - a),

with the weighted potential F(u) = int_0^u r**(m-1) f(r) dr. A spec is
*balanced* when F(1) = 0, which is what makes the standing front have zero
speed. For this family the balancing zero has the closed form
a = (m + alpha0) / (m + alpha0 + alpha1 + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

BALANCE_RTOL = 1e-12


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class EvaluationError(ArithmeticError):
    """A user-supplied function returned a non-finite value."""


def balanced_a(m: float, alpha0: float, alpha1: float) -> float:
    """Zero ``a`` that balances the weighted potential of the monomial family."""
    if m < 1 or alpha0 < 0 or alpha1 < 0:
        raise DomainError(f"need m >= 1, alpha0, alpha1 >= 0; got {m}, {alpha0}, {alpha1}")
    return (m + alpha0) / (m + alpha0 + alpha1 + 1.0)


@dataclass(frozen=True)
class ReactionSpec:
    m: float = 1.0
    k: float = 1.0
    alpha0: float = 1.0
    alpha1: float = 1.0
    a: float = 0.5
    amplitude: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise DomainError(f"m and k must be >= 1 (m={self.m}, k={self.k})")
        if self.alpha0 < 0 or self.alpha1 < 0:
            raise DomainError("alpha0 and alpha1 must be >= 0")
        if not 0.0 < self.a < 1.0:
            raise DomainError(f"a must lie in (0, 1), got {self.a}")
        if not self.amplitude > 0:
            raise DomainError("amplitude must be positive")

    @classmethod
    def balanced(cls, m=1.0, alpha0=1.0, alpha1=1.0, k=1.0, amplitude=1.0) -> "ReactionSpec":
        return cls(m=m, k=k, alpha0=alpha0, alpha1=alpha1,
                   a=balanced_a(m, alpha0, alpha1), amplitude=amplitude)

    # exponents of the Beta integrals int_0^u r^(p-1) (1-r)^(q-1) dr
    @property
    def _p(self) -> float:
        return self.m + self.alpha0

    @property
    def _q(self) -> float:
        return self.alpha1 + 1.0

    def lower_coefficient(self) -> float:
        """c0 in f(u) ~ -c0 u**alpha0 as u -> 0+."""
        return self.amplitude * self.a

    def upper_coefficient(self) -> float:
        """c1 in f(u) ~ c1 (1-u)**alpha1 as u -> 1-."""
        return self.amplitude * (1.0 - self.a)

    def to_text(self) -> str:
        return "\n".join(f"{name}={getattr(self, name)!r}"
                         for name in ("m", "k", "alpha0", "alpha1", "a", "amplitude"))


def _check_unit(u):
    arr = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("u must lie in [0, 1]")
    return arr


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def eval_f(spec: ReactionSpec, u):
    """f(u) for scalar or array ``u`` in [0, 1]."""
    u = _check_unit(u)
    val = spec.amplitude * u**spec.alpha0 * (1.0 - u)**spec.alpha1 * (u - spec.a)
    return _ret(val)


def eval_df(spec: ReactionSpec, u):
    """f'(u). Infinite at an endpoint whose exponent lies in (0, 1)."""
    u = _check_unit(u)
    a0, a1, a = spec.alpha0, spec.alpha1, spec.a
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = u**a0
        hi = (1.0 - u)**a1
        dlo = a0 * u**(a0 - 1.0) if a0 else 0.0
        dhi = -a1 * (1.0 - u)**(a1 - 1.0) if a1 else 0.0
        val = (dlo * hi + lo * dhi) * (u - a) + lo * hi
    return _ret(spec.amplitude * val)


def eval_d2f(spec: ReactionSpec, u):
    """f''(u) by central differences of the closed-form f'; interior use only."""
    u = np.asarray(u, dtype=float)
    h = 1e-5
    lo = np.clip(u - h, 0.0, 1.0)
    hi = np.clip(u + h, 0.0, 1.0)
    return _ret((np.asarray(eval_df(spec, hi)) - np.asarray(eval_df(spec, lo))) / (hi - lo))


def _head(spec: ReactionSpec, u):
    """int_0^u r^(m-1) f(r) dr via regularized incomplete Beta functions."""
    p, q, a = spec._p, spec._q, spec.a
    b0 = special.beta(p, q)
    b1 = special.beta(p + 1.0, q)
    return spec.amplitude * (b1 * special.betainc(p + 1.0, q, u) - a * b0 * special.betainc(p, q, u))


def _tail(spec: ReactionSpec, u):
    """int_u^1 r^(m-1) f(r) dr; complementary Betas keep relative accuracy as u -> 1."""
    return _tail_v(spec, 1.0 - np.asarray(u, dtype=float))


def _tail_v(spec: ReactionSpec, one_minus):
    p, q, a = spec._p, spec._q, spec.a
    b0 = special.beta(p, q)
    b1 = special.beta(p + 1.0, q)
    return spec.amplitude * (b1 * special.betainc(q, p + 1.0, one_minus) - a * b0 * special.betainc(q, p, one_minus))


def tail_potential(spec: ReactionSpec, v):
    """int_{1-v}^1 r^(m-1) f(r) dr, parameterized by the distance v to u = 1."""
    return _ret(_tail_v(spec, np.asarray(v, dtype=float)))


def balance_integral(spec: ReactionSpec) -> float:
    """F(1) = int_0^1 r^(m-1) f(r) dr, in closed form."""
    p, q = spec._p, spec._q
    return float(spec.amplitude * special.beta(p, q) * (p / (p + q) - spec.a))


def balance_scale(spec: ReactionSpec) -> float:
    """int_0^1 r^(m-1) |f(r)| dr; the scale against which F(1) is judged."""
    a = spec.a
    return float(_tail(spec, a) - _head(spec, a))


def eval_F(spec: ReactionSpec, u):
    """F(u) = int_0^u r^(m-1) f(r) dr.

    Above ``a`` the value is assembled as F(1) - int_u^1, so near u = 1 the
    result keeps full relative accuracy instead of cancelling.
    """
    u = _check_unit(u)
    f1 = balance_integral(spec)
    val = np.where(u <= spec.a, _head(spec, u), f1 - _tail(spec, u))
    return _ret(val)


def neg_potential(spec: ReactionSpec, u):
    """-F(u) for a balanced spec, with F(1) taken as exactly zero.

    Used by the profile construction where sqrt(-F) must stay accurate at
    both ends of (0, 1).
    """
    u = np.asarray(u, dtype=float)
    return np.where(u <= spec.a, -_head(spec, u), _tail(spec, u))


@dataclass(frozen=True)
class BoundaryFluxSpec:
    """Boundary flux density G(x, t, u) in d(u^m)/dnu = G / epsilon.

    ``G`` must accept numpy arrays: ``x`` of shape (n, dim), ``u`` of shape (n,).
    """

    G: Callable
    description: str = ""

    @classmethod
    def zero(cls) -> "BoundaryFluxSpec":
        return cls(lambda x, t, u: np.zeros_like(np.asarray(u, dtype=float)), "zero flux")

    def is_zero(self) -> bool:
        return self.description == "zero flux"


def boundary_g(flux: BoundaryFluxSpec, x, t: float) -> float:
    """g(x, t) = int_0^1 G(x, t, r) dr."""
    xb = np.atleast_2d(np.asarray(x, dtype=float))

    def integrand(r):
        val = np.asarray(flux.G(xb, t, np.array([r])), dtype=float).ravel()[0]
        if not math.isfinite(val):
            raise EvaluationError(f"G({x}, {t}, {r}) is not finite")
        return val

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(val)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass
class BistableReport:
    spec: ReactionSpec
    checks: list = field(default_factory=list)
    smoothness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def __str__(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} {c.detail}".rstrip()
                 for c in self.checks]
        lines += [f"smoothness {side}: {cls}" for side, cls in self.smoothness.items()]
        return "\n".join(lines)


def _smoothness_class(alpha: float) -> str:
    if alpha == 0 or float(alpha).is_integer():
        return "C-infinity"
    if alpha >= 2:
        return "C2"
    if alpha >= 1:
        return "C1"
    return "C0"


def validate_bistable(spec: ReactionSpec, n_samples: int = 999) -> BistableReport:
    """Diagnose the bistable structure of ``spec``; never raises."""
    report = BistableReport(spec)
    zeros = np.array([eval_f(spec, 0.0), eval_f(spec, spec.a), eval_f(spec, 1.0)])
    report.checks.append(Check("zeros", bool(np.all(zeros == 0.0)), float(np.max(np.abs(zeros))),
                               "f(0), f(a), f(1)"))

    u = np.linspace(0.0, 1.0, n_samples + 2)[1:-1]
    u = u[u != spec.a]
    sign_ok = np.asarray(eval_f(spec, u)) * (u - spec.a) > 0
    report.checks.append(Check("sign_pattern", bool(np.all(sign_ok)), float(np.sum(~sign_ok)),
                               "samples violating f(u)(u-a) > 0"))

    resid = balance_integral(spec) / balance_scale(spec)
    report.checks.append(Check("balance", abs(resid) <= BALANCE_RTOL, resid,
                               "F(1) relative to int r^(m-1)|f|"))

    uu = np.linspace(0.0, 1.0, 201)[1:-1]
    negF = neg_potential(spec, uu) if abs(resid) <= BALANCE_RTOL else -np.asarray(eval_F(spec, uu))
    report.checks.append(Check("potential_negative", bool(np.all(negF > 0)), float(np.min(negF)),
                               "min of -F on (0,1)"))

    report.smoothness = {"lower": _smoothness_class(spec.alpha0),
                         "upper": _smoothness_class(spec.alpha1)}
    return report
