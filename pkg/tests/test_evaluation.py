import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ralm.channel import ChannelCondition, ConditionModel, ErrorModelParams, Measurement, simulate_measurements
from ralm.errors import DataError
from ralm.evaluation import (ecdf, euclidean_errors, metrics_summary, percentile, residual_histograms,
                             write_ecdf_csv)
from ralm.geometry import DEFAULT_ANCHORS, CabinSpec, true_bearing, true_range
from ralm.trajectory import sample_uniform_positions

floats = st.floats(0, 100, allow_nan=False)


def test_euclidean_errors():
    assert euclidean_errors([(0, 0)], [(3, 4)]).tolist() == [5.0]
    assert euclidean_errors([(1, 2), (3, 4)], [(1, 2), (3, 4)]).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        euclidean_errors([(0, 0)], [(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        euclidean_errors([], [])


def test_errors_permutation_equivariant():
    rng = np.random.default_rng(0)
    p, t = rng.random((10, 2)), rng.random((10, 2))
    perm = rng.permutation(10)
    np.testing.assert_array_equal(euclidean_errors(p, t)[perm], euclidean_errors(p[perm], t[perm]))


def test_ecdf_examples():
    assert ecdf([2]) == [(2.0, 1.0)]
    assert [f for _, f in ecdf([4, 1, 3, 2])] == [0.25, 0.5, 0.75, 1.0]
    assert ecdf([1, 1, 2]) == [(1.0, 2 / 3), (2.0, 1.0)]
    with pytest.raises(ValueError):
        ecdf([])


@given(st.lists(st.integers(0, 20).map(float), min_size=1, max_size=60))
def test_ecdf_matches_counting_oracle(values):
    out = ecdf(values)
    assert [v for v, _ in out] == sorted(set(values))
    for v, f in out:
        assert f == sum(1 for x in values if x <= v) / len(values)
    assert out[-1][1] == 1.0


def test_percentile_examples():
    assert percentile([1, 2, 3, 4], 50) == 2
    assert all(percentile([5], p) == 5 for p in (0.1, 50, 95, 100))
    assert percentile([3, 9, 1], 100) == 9
    # 95 % of 20 is rank 19 exactly, not 20
    assert percentile(list(range(1, 21)), 95) == 19
    for bad in (0, -1, 100.5):
        with pytest.raises(ValueError):
            percentile([1.0], bad)
    with pytest.raises(ValueError):
        percentile([], 50)


@given(st.lists(floats, min_size=1, max_size=40), st.floats(0.01, 100), st.floats(0.01, 100))
def test_percentile_monotone_in_p(values, p, q):
    lo, hi = sorted((p, q))
    assert percentile(values, lo) <= percentile(values, hi)


def test_metrics_summary_examples():
    m = metrics_summary([(0, 0)], [(3, 4)])
    assert m["mse_m2"] == 12.5
    assert m["rmse_m"] == pytest.approx(3.5355, abs=5e-5)
    assert m["mean_m"] == m["median_m"] == m["p95_m"] == 5.0
    z = metrics_summary([(1, 1), (2, 2)], [(1, 1), (2, 2)])
    assert z["mse_m2"] == z["rmse_m"] == z["mean_m"] == z["median_m"] == z["p95_m"] == 0.0


def test_median_is_percentile_50():
    rng = np.random.default_rng(4)
    p, t = rng.random((17, 2)), rng.random((17, 2))
    m = metrics_summary(p, t)
    assert m["median_m"] == percentile(euclidean_errors(p, t), 50)
    assert m["count"] == 17


def test_ecdf_csv(tmp_path):
    write_ecdf_csv(ecdf([0.5, 0.25]), tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().splitlines() == ["error_m,fraction", "0.25,0.5", "0.5,1.0"]


def simulated(n, cmodel, noise_free=False, seed=0):
    cabin = CabinSpec()
    states = sample_uniform_positions(cabin, n, seed)
    truths = [s.position for s in states]
    meas = [simulate_measurements(p, DEFAULT_ANCHORS, cmodel, ErrorModelParams(), seed, i, noise_free)
            for i, p in enumerate(truths)]
    return meas, truths


def test_zero_noise_gives_single_spike():
    meas, truths = simulated(50, ConditionModel(1, 0, 0, 0), noise_free=True)
    h = residual_histograms(meas, truths, DEFAULT_ANCHORS, bins=9, range_span=(-1, 1))
    for kind in ("range", "angle"):
        counts = h[kind].counts
        assert counts.sum() == 400 and counts.max() == 400
        spike = int(np.argmax(counts))
        assert h[kind].edges[spike] <= 0 < h[kind].edges[spike + 1]


def test_counts_conserve_valid_measurements():
    meas, truths = simulated(200, ConditionModel(0.5, 0.2, 0.1, 0.2), seed=2)
    n_valid = sum(1 for ms in meas for m in ms if not m.failed)
    h = residual_histograms(meas, truths, DEFAULT_ANCHORS, bins=13, range_span=(-2, 2))
    assert h["range"].counts.sum() == n_valid == h["angle"].counts.sum()
    assert np.allclose(np.diff(h["range"].edges), 4 / 13)
    assert h["angle"].edges[0] == -math.pi and h["angle"].edges[-1] == math.pi


def test_los_range_residual_mean():
    meas, truths = simulated(1250, ConditionModel(1, 0, 0, 0), seed=11)
    pos = {a.id: a.position for a in DEFAULT_ANCHORS}
    res = [m.range - true_range(t, pos[m.anchor_id]) for ms, t in zip(meas, truths) for m in ms]
    assert len(res) == 10_000
    h = residual_histograms(meas, truths, DEFAULT_ANCHORS, bins=200)
    centers = (h["range"].edges[:-1] + h["range"].edges[1:]) / 2
    hist_mean = float(np.sum(centers * h["range"].counts) / h["range"].counts.sum())
    assert abs(np.mean(res)) < 0.01
    assert abs(hist_mean) < 0.01


def test_angle_residual_is_wrapped():
    a = DEFAULT_ANCHORS[0]
    tag = (a.position.x - 1.0, a.position.y + 0.01)
    bearing = true_bearing(tag, a.position)
    m = Measurement(a.id, None, -math.pi + 0.001, ChannelCondition.LOS)
    h = residual_histograms([[m]], [tag], DEFAULT_ANCHORS, bins=4)
    assert "range" not in h and h["angle"].counts.sum() == 1
    assert bearing > 3.0
    # raw difference is near -2 pi; wrapped it is just above zero
    assert h["angle"].counts.tolist() == [0, 0, 1, 0]


def test_no_valid_measurements():
    m = Measurement(0, None, None, ChannelCondition.FAILURE)
    with pytest.raises(DataError):
        residual_histograms([[m]], [(1.0, 1.0)], DEFAULT_ANCHORS)
    with pytest.raises(ValueError):
        residual_histograms([[m]], [(1.0, 1.0)], DEFAULT_ANCHORS, bins=0)
