import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmefront.front import (ContactAngleError, ContactBC, ExtinctionError, GraphFrontState, InstabilityError,
                            RadialFrontState, contact_slope, graph_step, graph_stable_dt, radial_evolve,
                            run_front, traveling_profile, traveling_speed)
from pmefront.profile import constants_by_quadrature
from pmefront.reaction import ReactionSpec


def test_radial_examples():
    state = radial_evolve(RadialFrontState(1.0), 0.3)
    assert state.R == pytest.approx(math.sqrt(0.4), rel=1e-15)
    assert radial_evolve(state, 0.0) is state
    assert RadialFrontState(1.0).extinction_time() == 0.5
    with pytest.raises(ExtinctionError):
        radial_evolve(RadialFrontState(1.0), 0.6)


def test_printed_convention_grows():
    state = RadialFrontState(1.0, convention="printed")
    assert state.radius_at(0.3) == pytest.approx(math.sqrt(1.6))
    assert state.extinction_time() == math.inf
    with pytest.raises(ValueError):
        RadialFrontState(1.0, convention="other")


@pytest.mark.parametrize("N,mob", [(2, 1.0), (3, 1.2), (2, 10 / 9)])
def test_stepped_radial_matches_closed_form(N, mob):
    state = RadialFrontState(1.0, N, mob)
    t_ext = state.extinction_time()
    for _ in range(1000):
        state = radial_evolve(state, 0.8 * t_ext / 1000)
    exact = math.sqrt(1.0 - 2 * mob * (N - 1) * state.t)
    assert abs(state.R - exact) <= 1e-12 * exact
    snaps = run_front(RadialFrontState(1.0, N, mob), None, 0.4 * t_ext, [0.1 * t_ext, 0.4 * t_ext])
    for s in snaps:
        assert s.R == pytest.approx(math.sqrt(1.0 - 2 * mob * (N - 1) * s.t), rel=1e-14)


def test_contact_slope_examples():
    assert contact_slope(ContactBC(0.0, 0.0), "left") == 0.0
    assert abs(contact_slope(ContactBC(1 / math.sqrt(2), 0.0), "left") - 1.0) <= 1e-12
    assert abs(contact_slope(ContactBC(0.0, 1 / math.sqrt(2)), "right") + 1.0) <= 1e-12
    with pytest.raises(ContactAngleError):
        contact_slope(ContactBC(1.0, 0.0), "left")
    with pytest.raises(ContactAngleError):
        contact_slope(ContactBC(0.2, 0.0, D_const=0.1), "left")
    assert contact_slope(ContactBC(0.2, 0.0, D_const=0.1, divide_by_D=False), "left") == pytest.approx(0.2 / math.sqrt(0.96))


@given(st.floats(-0.99, 0.99))
def test_contact_slope_realizes_the_angle(ghat):
    slope = contact_slope(ContactBC(ghat, ghat), "left")
    assert slope / math.sqrt(1 + slope**2) == pytest.approx(ghat, abs=1e-12)
    assert contact_slope(ContactBC(ghat, ghat), "right") == -slope


def test_flat_stationary():
    state = GraphFrontState(np.full(33, 0.7))
    out, = run_front(state, ContactBC(), 0.5)
    np.testing.assert_array_equal(out.w, 0.7)


def test_flat_graph_translates_with_drift():
    spec = ReactionSpec.balanced(2.0, 1.0, 1.0, k=1.5)
    c = constants_by_quadrature(spec)
    q2 = 0.8
    state = GraphFrontState(np.zeros(33), 1.0, c.mobility, c.drift_gain, (0.3, q2))
    for out in run_front(state, ContactBC(), 0.5, [0.1, 0.5]):
        np.testing.assert_allclose(out.w, c.drift_gain * q2 * out.t, rtol=1e-12, atol=0)


def test_small_amplitude_decay_rate():
    c = constants_by_quadrature(ReactionSpec.balanced(2.0, 1.0, 1.0))
    L, delta = 1.0, 1e-4
    x = np.linspace(0.0, L, 129)
    state = GraphFrontState(delta * np.cos(np.pi * x / L), L, c.mobility, c.drift_gain)
    times = [0.05, 0.1, 0.15, 0.2]
    amps = [0.5 * np.ptp(s.w) for s in run_front(state, ContactBC(), times[-1], times)]
    rate = -np.polyfit(times, np.log(amps), 1)[0]
    assert rate == pytest.approx(c.mobility * (np.pi / L)**2, rel=0.05)


def test_traveling_profile_with_contact_angle():
    bc = ContactBC(0.3, 0.3)
    state = GraphFrontState(np.zeros(65))
    a, b, c = run_front(state, bc, 2.02, [2.0, 2.01, 2.02])
    speed = traveling_speed(bc, 1.0, 1.0)
    wt1, wt2 = (b.w - a.w) / 0.01, (c.w - b.w) / 0.01
    assert np.ptp(wt2) <= 1e-6
    assert np.max(np.abs(wt2 - wt1)) <= 1e-6
    assert np.mean(wt2) == pytest.approx(speed, rel=1e-3)
    np.testing.assert_allclose(c.w - c.w[0], traveling_profile(bc, 1.0, 1.0, c.x), atol=1e-3)
    # boundary slopes as prescribed (second-order one-sided differences)
    h = c.h
    left = (-3 * c.w[0] + 4 * c.w[1] - c.w[2]) / (2 * h)
    assert left == pytest.approx(contact_slope(bc, "left"), abs=5e-3)


def test_step_rejects_unstable_dt():
    state = GraphFrontState(np.zeros(33))
    with pytest.raises(InstabilityError):
        graph_step(state, ContactBC(), 10 * graph_stable_dt(state, ContactBC(), safety=1.0))


def test_graph_self_convergence():
    w_mid = []
    for n in (17, 33, 65):
        x = np.linspace(0, 1, n)
        out, = run_front(GraphFrontState(0.2 * np.cos(np.pi * x) + 0.1 * x**2), ContactBC(0.2, -0.1), 0.05)
        w_mid.append(out.w[n // 2])
    d1, d2 = abs(w_mid[1] - w_mid[0]), abs(w_mid[2] - w_mid[1])
    assert math.log2(d1 / d2) >= 1.0


HEIGHTS = st.lists(st.floats(-0.5, 0.5), min_size=9, max_size=33).map(np.array)


@settings(max_examples=30)
@given(HEIGHTS)
def test_graph_maximum_principle(w0):
    outs = run_front(GraphFrontState(w0), ContactBC(), 0.02, [0.005, 0.01, 0.02])
    maxes = [w0.max()] + [o.w.max() for o in outs]
    mins = [w0.min()] + [o.w.min() for o in outs]
    assert all(b <= a + 1e-15 for a, b in zip(maxes, maxes[1:]))
    assert all(b >= a - 1e-15 for a, b in zip(mins, mins[1:]))


@settings(max_examples=30)
@given(HEIGHTS, st.floats(-3.0, 3.0), st.floats(-0.5, 0.5))
def test_translation_covariance(w0, shift, g):
    bc = ContactBC(g, g)
    base, = run_front(GraphFrontState(w0, q=(0.4, 0.2)), bc, 0.01)
    moved, = run_front(GraphFrontState(w0 + shift, q=(0.4, 0.2)), bc, 0.01)
    np.testing.assert_allclose(moved.w - shift, base.w, atol=1e-12 * (1 + abs(shift)))


@given(st.floats(0.05, 2.0), st.floats(0.0, 0.2), st.floats(0.0, 0.2))
def test_radial_semigroup(R, dt1, dt2):
    state = RadialFrontState(R, 2, 1.0)
    total = dt1 + dt2
    if total >= state.extinction_time():
        return
    two = radial_evolve(radial_evolve(state, dt1), dt2)
    assert two.R == pytest.approx(state.radius_at(total), rel=1e-12)
    assert replace(two, R=0.0).t == pytest.approx(total)
