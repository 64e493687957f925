"""Sharp-interface limit flows.

Radial fronts follow dR/dt = -mobility (N - 1) / R, integrated exactly as
R^2 - 2 mobility (N - 1) t. The opposite sign (fronts growing by
curvature) is kept behind ``convention="printed"`` so the two readings can
be compared against the epsilon-problem.

Graph fronts over a 1-D base [0, L] follow

    w_t = mobility * w_xx / (1 + w_x^2) + drift_gain * (-q1 w_x + q2),

with the contact law w_x/sqrt(1+w_x^2) = g/D at x = 0 and
-w_x/sqrt(1+w_x^2) = g/D at x = L, imposed through ghost nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

CONVENTIONS = ("derived", "printed")


class ExtinctionError(ArithmeticError):
    def __init__(self, extinction_time: float):
        super().__init__(f"front extinct at t = {extinction_time:.17g}")
        self.extinction_time = extinction_time


class ContactAngleError(ValueError):
    pass


class InstabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class RadialFrontState:
    R: float
    N: int = 2
    mobility: float = 1.0
    t: float = 0.0
    convention: str = "derived"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")

    @property
    def sign(self) -> float:
        return -1.0 if self.convention == "derived" else 1.0

    @property
    def rate(self) -> float:
        """d(R^2)/dt."""
        return self.sign * 2.0 * self.mobility * (self.N - 1)

    def extinction_time(self) -> float:
        if self.rate >= 0:
            return math.inf
        return self.t + self.R**2 / -self.rate

    def radius_at(self, t: float) -> float:
        r2 = self.R**2 + self.rate * (t - self.t)
        if r2 <= 0:
            raise ExtinctionError(self.extinction_time())
        return math.sqrt(r2)


def radial_evolve(state: RadialFrontState, dt: float) -> RadialFrontState:
    """Advance by ``dt`` with the exact radius law."""
    if dt == 0:
        return state
    return replace(state, R=state.radius_at(state.t + dt), t=state.t + dt)


@dataclass(frozen=True)
class ContactBC:
    g_left: float = 0.0
    g_right: float = 0.0
    D_const: float = 1.0
    divide_by_D: bool = True

    def normalized(self, side: str) -> float:
        g = self.g_left if side == "left" else self.g_right
        return g / self.D_const if self.divide_by_D else g


def contact_slope(bc: ContactBC, side: str) -> float:
    """Boundary slope w_x realizing n . nu = g/D on ``side``."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    ghat = bc.normalized(side)
    if abs(ghat) >= 1:
        raise ContactAngleError(f"|g/D| = {abs(ghat):.6g} >= 1 on the {side} wall: no transversal contact")
    slope = ghat / math.sqrt(1.0 - ghat * ghat)
    return slope if side == "left" else -slope


QType = Union[tuple, Callable]


@dataclass(frozen=True)
class GraphFrontState:
    """Heights ``w`` at nodes x_j = j * h, j = 0..M, over [0, L]."""

    w: np.ndarray
    length: float = 1.0
    mobility: float = 1.0
    drift_gain: float = 1.0
    q: QType = (0.0, 0.0)
    t: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.w.size)

    @property
    def h(self) -> float:
        return self.length / (self.w.size - 1)

    def q_at(self, t=None):
        if callable(self.q):
            q1, q2 = self.q(self.x, self.w, self.t if t is None else t)
        else:
            q1, q2 = self.q
        return (np.broadcast_to(np.asarray(q1, dtype=float), self.w.shape),
                np.broadcast_to(np.asarray(q2, dtype=float), self.w.shape))


def _padded(state: GraphFrontState, bc: ContactBC):
    w, h = state.w, state.h
    wp = np.empty(w.size + 2)
    wp[1:-1] = w
    wp[0] = w[1] - 2.0 * h * contact_slope(bc, "left")
    wp[-1] = w[-2] + 2.0 * h * contact_slope(bc, "right")
    return wp


def graph_stable_dt(state: GraphFrontState, bc: ContactBC, safety: float = 0.4) -> float:
    """safety * min(h^2 (1 + min w_x^2) / (2 mobility), h / (drift_gain max|q1|))."""
    wp = _padded(state, bc)
    h = state.h
    wx = (wp[2:] - wp[:-2]) / (2.0 * h)
    bound = h * h * (1.0 + float(np.min(wx * wx))) / (2.0 * state.mobility)
    q1, _ = state.q_at()
    qmax = float(np.max(np.abs(q1))) * state.drift_gain
    if qmax > 0:
        bound = min(bound, h / qmax)
    return safety * bound


def graph_step(state: GraphFrontState, bc: ContactBC, dt: float) -> GraphFrontState:
    """One explicit step of the graph flow."""
    if dt > graph_stable_dt(state, bc, safety=1.0) * (1 + 1e-12):
        raise InstabilityError(f"dt = {dt:.3e} exceeds the graph-flow stability bound")
    h = state.h
    wp = _padded(state, bc)
    wx = (wp[2:] - wp[:-2]) / (2.0 * h)
    wxx = (wp[2:] - 2.0 * wp[1:-1] + wp[:-2]) / (h * h)
    q1, q2 = state.q_at()
    upwind = np.where(q1 > 0, (wp[1:-1] - wp[:-2]) / h, (wp[2:] - wp[1:-1]) / h)
    rhs = state.mobility * wxx / (1.0 + wx * wx) + state.drift_gain * (q2 - q1 * upwind)
    w = state.w + dt * rhs
    if not np.all(np.isfinite(w)):
        raise InstabilityError("non-finite heights")
    return replace(state, w=w, t=state.t + dt)


def run_front(state, bc: ContactBC | None, t_end: float, snapshots=None, safety: float = 0.4) -> list:
    """States at each snapshot time (default: ``[t_end]``).

    Radial states use the closed form from the initial state; graph states
    are stepped with the stable step, clipped to land on each snapshot.
    """
    times = sorted(snapshots) if snapshots is not None else [t_end]
    if isinstance(state, RadialFrontState):
        return [replace(state, R=state.radius_at(t), t=t) for t in times]
    bc = bc or ContactBC()
    out = []
    cur = state
    for target in times:
        while cur.t < target:
            dt = graph_stable_dt(cur, bc, safety)
            last = cur.t + dt >= target * (1 - 1e-14)
            cur = graph_step(cur, bc, target - cur.t if last else dt)
            if last:
                cur = replace(cur, t=target)
        out.append(cur)
    return out


def traveling_speed(bc: ContactBC, mobility: float, length: float) -> float:
    """Speed of the translating profile with the prescribed contact slopes (q = 0).

    W' = tan(theta(x)) with theta linear from atan(s_left) to atan(s_right),
    so mobility * theta' = c.
    """
    th_l = math.atan(contact_slope(bc, "left"))
    th_r = math.atan(contact_slope(bc, "right"))
    return mobility * (th_r - th_l) / length


def traveling_profile(bc: ContactBC, mobility: float, length: float, x) -> np.ndarray:
    """Shape W(x) - W(0) of the translating profile."""
    th_l = math.atan(contact_slope(bc, "left"))
    th_r = math.atan(contact_slope(bc, "right"))
    x = np.asarray(x, dtype=float)
    kappa = (th_r - th_l) / length
    if abs(kappa) < 1e-300:
        return np.tan(th_l) * x
    return (np.log(np.cos(th_l)) - np.log(np.cos(th_l + kappa * x))) / kappa
