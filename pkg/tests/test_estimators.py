import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ralm.errors import NoInformationError
from ralm.estimators import argmax_position, weighted_centroid
from ralm.geometry import CabinSpec, GridSpec, cell_center

G = GridSpec(CabinSpec(0, 10, 0, 4), 4, 10)


def test_argmax_single_peak():
    f = np.zeros(G.shape)
    f[2, 3] = 1.0
    p, m, n = argmax_position(f, G)
    assert (m, n) == (2, 3) and p == cell_center(G, 2, 3)


def test_argmax_tie_break_and_errors():
    assert argmax_position(np.full(G.shape, 0.3), G)[1:] == (0, 0)
    f = np.zeros(G.shape)
    f[1, 7] = f[3, 0] = 2.0
    assert argmax_position(f, G)[1:] == (1, 7)
    with pytest.raises(NoInformationError):
        argmax_position(np.zeros(G.shape), G)
    with pytest.raises(NoInformationError):
        argmax_position(np.full(G.shape, -np.inf), G, log_domain=True)


def test_centroid_examples():
    f = np.zeros(G.shape)
    f[1, 2] = 5.0
    assert weighted_centroid(f, G) == pytest.approx(cell_center(G, 1, 2))
    f[3, 6] = 5.0
    a, b = cell_center(G, 1, 2), cell_center(G, 3, 6)
    assert weighted_centroid(f, G) == pytest.approx(((a.x + b.x) / 2, (a.y + b.y) / 2))
    with pytest.raises(NoInformationError):
        weighted_centroid(np.zeros(G.shape), G)


def test_centroid_of_symmetric_bump():
    g = GridSpec(CabinSpec(), 41, 61)
    X, Y = g.centers()
    c = cell_center(g, 20, 30)
    bump = np.exp(-((X - c.x) ** 2 + (Y - c.y) ** 2) / (2 * 0.5 ** 2))
    p = weighted_centroid(bump, g)
    assert math.dist(p, c) < 1e-6
    q = weighted_centroid(np.log(bump), g, log_domain=True)
    assert math.dist(q, c) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_argmax_scale_invariant_and_centroid_in_hull(seed, scale):
    rng = np.random.default_rng(seed)
    f = rng.random(G.shape) * (rng.random(G.shape) > 0.5)
    if not f.any():
        return
    assert argmax_position(f, G)[1:] == argmax_position(f * scale, G)[1:]
    p = weighted_centroid(f, G)
    X, Y = G.centers()
    on = f > 0
    assert X[on].min() - 1e-9 <= p.x <= X[on].max() + 1e-9
    assert Y[on].min() - 1e-9 <= p.y <= Y[on].max() + 1e-9
