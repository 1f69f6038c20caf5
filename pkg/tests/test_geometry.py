import math

import pytest
from hypothesis import given, strategies as st

from ralm.errors import DataError, DegenerateBearingWarning, OutOfBoundsError
from ralm.geometry import (DEFAULT_ANCHORS, CabinSpec, GridSpec, Point2D, cell_center, containing_cell,
                           true_bearing, true_range, wrap_angle)

coord = st.floats(-100, 100, allow_nan=False)
points = st.tuples(coord, coord)


def test_true_range_examples():
    assert true_range((3, 4), (0, 0)) == 5.0
    assert true_range((1.5, 2), (1.5, 2)) == 0.0
    assert true_range((30, 3.5), (0, 0)) == pytest.approx(30.2034766210779119, rel=1e-15)


def test_true_bearing_examples():
    assert true_bearing((1, 1), (0, 0)) == pytest.approx(math.pi / 4)
    assert true_bearing((-1, 0), (0, 0)) == math.pi
    assert true_bearing((0, -2), (0, 0)) == pytest.approx(-math.pi / 2)


def test_true_bearing_coincident_warns_and_returns_zero():
    with pytest.warns(DegenerateBearingWarning):
        assert true_bearing((2, 2), (2, 2)) == 0.0


@pytest.mark.parametrize("a, expected", [(2 * math.pi, 0.0), (-math.pi, math.pi), (3 * math.pi / 2, -math.pi / 2),
                                         (math.pi, math.pi), (-1e-17, -1e-17)])
def test_wrap_angle_examples(a, expected):
    assert wrap_angle(a) == pytest.approx(expected, abs=1e-15)


def test_cell_center_examples():
    g = GridSpec(CabinSpec(0, 10, 0, 4), 4, 10)
    assert cell_center(g, 0, 0) == (0.5, 0.5)
    assert cell_center(g, 3, 9) == (9.5, 3.5)
    big = GridSpec(CabinSpec(), 62, 62)
    c = cell_center(big, 0, 0)
    assert c.x == pytest.approx(15 / 62, rel=1e-14)
    assert c.y == pytest.approx(0.028225806451612902, rel=1e-14)
    with pytest.raises(IndexError):
        cell_center(g, 4, 0)


def test_containing_cell_examples():
    g = GridSpec(CabinSpec(0, 10, 0, 4), 4, 10)
    assert containing_cell(g, (0.5, 0.5)) == (0, 0)
    assert containing_cell(g, (10, 4)) == (3, 9)
    assert containing_cell(g, (9.49, 3.49)) == (3, 9)
    with pytest.raises(OutOfBoundsError):
        containing_cell(g, (10.01, 1))


def test_invalid_specs_rejected():
    with pytest.raises(DataError):
        CabinSpec(1, 1, 0, 1)
    with pytest.raises(DataError):
        GridSpec(CabinSpec(), 1, 5)


def test_default_anchor_layout():
    assert len(DEFAULT_ANCHORS) == 8
    assert {a.position for a in DEFAULT_ANCHORS} == {Point2D(x, y) for x in (3, 11, 19, 27) for y in (0.2, 3.3)}


@given(points, points, points)
def test_range_symmetric_and_triangle(a, b, c):
    assert true_range(a, b) == true_range(b, a)
    assert true_range(a, c) <= true_range(a, b) + true_range(b, c) + 1e-9


@given(points, points)
def test_bearing_reverses_by_pi(tag, anchor):
    if tag == anchor:
        return
    fwd = true_bearing(tag, anchor)
    back = wrap_angle(true_bearing(anchor, tag) + math.pi)
    assert abs(wrap_angle(fwd - back)) < 1e-12


@given(st.floats(-1e3, 1e3, allow_nan=False), st.integers(-20, 20))
def test_wrap_angle_idempotent_and_periodic(a, k):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert wrap_angle(w) == w
    assert abs(wrap_angle(wrap_angle(a + 2 * math.pi * k) - w)) < 1e-9


@given(st.integers(2, 80), st.integers(2, 80), st.data())
def test_containing_cell_inverts_cell_center(rows, cols, data):
    g = GridSpec(CabinSpec(), rows, cols)
    m = data.draw(st.integers(0, rows - 1))
    n = data.draw(st.integers(0, cols - 1))
    assert containing_cell(g, cell_center(g, m, n)) == (m, n)
