import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmefront.levelset import (DomainError, InterfaceCurve, extract_level_set, signed_distance_at,
                               signed_distance_field, unsigned_distance)
from pmefront.pde import Field, Grid


def circle_field(grid, radius, center=(0.0, 0.0)):
    X, Y = grid.mesh()
    return Field(radius - np.hypot(X - center[0], Y - center[1]))


def test_linear_field_single_exact_crossing():
    grid = Grid.line(0.0, 1.0, 10)
    x, = grid.centers()
    curve = extract_level_set(Field(x), grid, 0.5)
    assert curve.vertices().tolist() == [0.5]


def test_radial_logistic_crossing_within_h():
    R0, delta = 0.6, 0.05
    grid = Grid.radial(1.0, 100)
    r, = grid.centers()
    curve = extract_level_set(Field(1 / (1 + np.exp((r - R0) / delta))), grid, 0.5)
    assert curve.vertices().size == 1
    assert abs(curve.vertices()[0] - R0) <= grid.h


def test_uniform_field_is_empty():
    for grid in (Grid.line(0, 1, 10), Grid.rectangle((0, 1), (0, 1), (8, 8))):
        curve = extract_level_set(Field(np.full(grid.shape, 0.3)), grid, 0.5)
        assert curve.is_empty()


def test_non_finite_field_rejected():
    with pytest.raises(DomainError):
        extract_level_set(Field(np.array([0.0, np.nan, 1.0])), Grid.line(0, 1, 3), 0.5)


def test_extracted_circle_is_closed_and_accurate():
    grid = Grid.rectangle((-1, 1), (-1, 1), (80, 80))
    curve = extract_level_set(circle_field(grid, 0.5), grid, 0.0)
    assert len(curve.points) == 1
    loop = curve.points[0]
    np.testing.assert_array_equal(loop[0], loop[-1])
    assert np.max(np.abs(np.hypot(loop[:, 0], loop[:, 1]) - 0.5)) <= 1e-3


def test_two_blobs_give_two_curves():
    grid = Grid.rectangle((0, 2), (0, 1), (80, 40))
    a = circle_field(grid, 0.25, (0.5, 0.5)).values
    b = circle_field(grid, 0.25, (1.5, 0.5)).values
    curve = extract_level_set(Field(np.maximum(a, b)), grid, 0.0)
    assert len(curve.points) == 2


def test_open_curve_across_rectangle():
    grid = Grid.rectangle((0, 1), (-1, 1), (20, 40))
    X, Y = grid.mesh()
    curve = extract_level_set(Field(Y - 0.1 * X), grid, 0.0)
    assert len(curve.points) == 1
    pts = curve.points[0]
    np.testing.assert_allclose(pts[:, 1], 0.1 * pts[:, 0], atol=1e-12)


def test_saddle_cell_resolution():
    grid = Grid.rectangle((0, 1), (0, 1), (2, 2))
    u = np.array([[1.0, 0.0], [0.0, 1.0]])
    zeros = np.array([[0.75, 0.25], [0.25, 0.75]])
    ones = np.array([[0.25, 0.25], [0.75, 0.75]])

    def isolated(curve):
        mids = np.array([p.mean(axis=0) for p in curve.points])
        near_zero = np.min(np.linalg.norm(mids[:, None] - zeros[None], axis=2), axis=1)
        near_one = np.min(np.linalg.norm(mids[:, None] - ones[None], axis=2), axis=1)
        return "zeros" if np.all(near_zero < near_one) else "ones"

    # cell average 0.5: above a level of 0.4 the 1-corners connect, the 0-corners are cut off
    mean_above = extract_level_set(Field(u), grid, 0.4)
    mean_below = extract_level_set(Field(u), grid, 0.6)
    assert len(mean_above.points) == 2 and len(mean_below.points) == 2
    assert isolated(mean_above) == "zeros" and isolated(mean_below) == "ones"


def test_signed_distance_examples():
    theta = np.linspace(0, 2 * np.pi, 2001)
    circle = InterfaceCurve("rectangle", [np.column_stack([np.cos(theta), np.sin(theta)])])
    assert signed_distance_at(circle, np.array([0.0, 0.0]), True) == pytest.approx(1.0, abs=1e-5)
    assert signed_distance_at(circle, np.array([1.0, 0.0]), False) == pytest.approx(0.0, abs=1e-12)
    assert signed_distance_at(circle, np.array([2.0, 0.0]), lambda x: np.hypot(*x) < 1) == pytest.approx(-1.0, abs=1e-5)
    radial = InterfaceCurve("radial", np.array([0.7]))
    assert signed_distance_at(radial, np.array([0.3, 0.4]), True) == pytest.approx(0.2)


def test_signed_distance_field_on_extracted_circle():
    grid = Grid.rectangle((-1, 1), (-1, 1), (64, 64))
    field = circle_field(grid, 0.6)
    curve = extract_level_set(field, grid, 0.0)
    d = signed_distance_field(curve, field, grid)
    np.testing.assert_allclose(d, field.values, atol=grid.h)


def test_empty_curve_distance_errors():
    with pytest.raises(DomainError):
        unsigned_distance(InterfaceCurve("line", np.array([])), np.array([0.0]))


@given(st.floats(-0.9, 0.9), st.floats(0.1, 5.0))
def test_line_crossing_of_affine_field_is_exact(x0, slope):
    grid = Grid.line(-1.0, 1.0, 41)
    x, = grid.centers()
    curve = extract_level_set(Field(slope * (x - x0)), grid, 0.0)
    assert curve.vertices().size == 1
    assert curve.vertices()[0] == pytest.approx(x0, abs=1e-12)


@given(st.floats(0.2, 0.7), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_circle_extraction_within_h(radius, cx, cy):
    grid = Grid.rectangle((-1, 1), (-1, 1), (50, 50))
    curve = extract_level_set(circle_field(grid, radius, (cx, cy)), grid, 0.0)
    pts = curve.vertices()
    assert np.max(np.abs(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) - radius)) <= grid.h
    assert all(np.array_equal(p[0], p[-1]) for p in curve.points)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(-5, 5))
def test_unsigned_distance_is_nearest_point(points, q):
    curve = InterfaceCurve("line", np.array(points))
    assert unsigned_distance(curve, np.array([q]))[0] == min(abs(q - p) for p in points)
    assert math.isfinite(signed_distance_at(curve, np.array(q), q > 0))
