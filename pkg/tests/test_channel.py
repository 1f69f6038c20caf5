import math

import numpy as np
import pytest
from scipy import stats

from ralm.channel import (ChannelCondition as CC, ConditionModel, ErrorModelParams, draw_condition,
                          sample_angle_error, sample_range_error, simulate_measurement, simulate_measurements)
from ralm.errors import DataError
from ralm.geometry import DEFAULT_ANCHORS, Anchor, Point2D, true_bearing, true_range

PARAMS = ErrorModelParams()
N = 100_000


def test_table_defaults():
    assert PARAMS.sigma_r_los == 0.3
    assert PARAMS.sigma_theta_los == pytest.approx(0.052359878, abs=1e-9)
    assert (PARAMS.nlos_mu, PARAMS.nlos_sigma) == (0.8, 1.07)


def test_condition_model_validation():
    with pytest.raises(DataError):
        ConditionModel(0.5, 0.5, 0.1, 0.0)
    with pytest.raises(DataError):
        ConditionModel(1.1, -0.1, 0, 0)


def test_degenerate_condition_models(rng):
    assert {draw_condition(ConditionModel(1, 0, 0, 0), rng) for _ in range(200)} == {CC.LOS}
    assert {draw_condition(ConditionModel(0, 0, 0, 1), rng) for _ in range(200)} == {CC.FAILURE}


def test_condition_frequencies(rng):
    model = ConditionModel(0.7, 0.2, 0.05, 0.05)
    draws = [draw_condition(model, rng) for _ in range(N)]
    for cond, p in [(CC.LOS, 0.7), (CC.NLOS, 0.2), (CC.OUTLIER, 0.05), (CC.FAILURE, 0.05)]:
        assert abs(draws.count(cond) / N - p) < 0.01


def test_los_range_std(rng):
    s = sample_range_error(CC.LOS, 10.0, PARAMS, rng, N).std()
    assert 0.291 <= s <= 0.309


def test_nlos_range_median(rng):
    med = np.median(sample_range_error(CC.NLOS, 10.0, PARAMS, rng, N))
    assert abs(med / 2.2255409284924676 - 1) < 0.03


def test_outlier_range_support(rng):
    e = sample_range_error(CC.OUTLIER, 5.0, PARAMS, rng, N)
    assert e.min() >= -5 and e.max() <= 5


def test_angle_errors(rng):
    los = sample_angle_error(CC.LOS, PARAMS, rng, N)
    assert abs(los.std() / 0.052360 - 1) < 0.03
    for cond in (CC.NLOS, CC.OUTLIER):
        u = sample_angle_error(cond, PARAMS, rng, N)
        assert abs(u.mean()) < 0.02
        assert u.min() >= -math.pi and u.max() <= math.pi


def test_failure_has_no_error_model(rng):
    with pytest.raises(ValueError):
        sample_range_error(CC.FAILURE, 1.0, PARAMS, rng)
    with pytest.raises(ValueError):
        sample_angle_error(CC.FAILURE, PARAMS, rng)


def test_forced_failure_records_nulls():
    m = simulate_measurement((5, 1), DEFAULT_ANCHORS[0], ConditionModel(0, 0, 0, 1), PARAMS, 1, 0)
    assert m.range is None and m.angle is None and m.condition is CC.FAILURE and m.failed


def test_zero_noise_is_identity():
    tag, a = Point2D(12.3, 2.1), DEFAULT_ANCHORS[5]
    m = simulate_measurement(tag, a, ConditionModel(1, 0, 0, 0), PARAMS, 1, 0, noise_free=True)
    assert m.range == true_range(tag, a.position)
    assert m.angle == true_bearing(tag, a.position)


def test_outlier_range_support_in_measurement():
    a = Anchor(0, Point2D(0, 0))
    tag = Point2D(4, 0)
    for i in range(500):
        m = simulate_measurement(tag, a, ConditionModel(0, 0, 1, 0), PARAMS, 3, i)
        assert 0 <= m.range <= 8


def test_measurements_in_domain_and_order_independent():
    model = ConditionModel()
    tags = [Point2D(1 + i * 0.9, 0.1 + (i % 7) * 0.45) for i in range(30)]
    fwd = [simulate_measurements(t, DEFAULT_ANCHORS, model, PARAMS, 9, i) for i, t in enumerate(tags)]
    rev = [simulate_measurements(tags[i], DEFAULT_ANCHORS[::-1], model, PARAMS, 9, i)
           for i in reversed(range(len(tags)))][::-1]
    assert fwd == rev
    for ms in fwd:
        for m in ms:
            assert m.range is None or m.range >= 0
            assert m.angle is None or -math.pi < m.angle <= math.pi


def test_los_residuals_pass_chi_square():
    a = Anchor(0, Point2D(0, 0))
    tag = Point2D(10, 2)
    d = true_range(tag, a.position)
    res = np.array([simulate_measurement(tag, a, ConditionModel(1, 0, 0, 0), PARAMS, 17, i).range - d
                    for i in range(20_000)])
    edges = np.linspace(-4, 4, 17) * PARAMS.sigma_r_los
    observed, _ = np.histogram(res, np.concatenate([[-np.inf], edges[1:-1], [np.inf]]))
    cdf = stats.norm.cdf(np.concatenate([[-np.inf], edges[1:-1], [np.inf]]), scale=PARAMS.sigma_r_los)
    expected = np.diff(cdf) * len(res)
    assert stats.chisquare(observed, expected).pvalue > 0.01
