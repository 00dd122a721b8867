import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mccqr.calibration import (CalibrationReport, central_interval, coverage, crossing_rate,
                               intervals, median_abs_error, picp, picp_curve)
from mccqr.predict import PredictiveDistribution


def test_median_abs_error_hand_cases():
    assert median_abs_error([1, 2, 3], [2, 4, 6]) == 2.0
    assert median_abs_error([0, 0, 0, 0], [1, 2, 3, 4]) == 2.5
    with pytest.raises(ValueError):
        median_abs_error([], [])


def test_central_interval_type7():
    draws = np.arange(11.0)  # type 7 puts the 5% quantile at 0.5
    assert central_interval(draws, 0.9) == pytest.approx((0.5, 9.5))


def test_coverage_bounds_are_inclusive():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    b = np.array([[0.0, 1.0], [0.0, 1.0], [2.5, 3.0], [0.0, 2.9]])
    assert coverage(y, b) == 0.5


def test_picp_on_known_distribution():
    g = np.random.default_rng(0)
    dists = [PredictiveDistribution(g.normal(size=2000)) for _ in range(3000)]
    y = g.normal(size=3000)
    assert abs(picp(dists, y, 0.8) - 0.8) < 0.03
    with pytest.raises(ValueError):
        picp(dists, y[:-1], 0.8)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_picp_monotone_in_level(seed):
    g = np.random.default_rng(seed)
    dists = [PredictiveDistribution(g.normal(size=50)) for _ in range(30)]
    y = g.normal(size=30)
    rep = picp_curve(dists, y)
    assert np.all(np.diff(rep.picp) >= 0)
    assert np.all((rep.picp >= 0) & (rep.picp <= 1))


def test_intervals_vectorised_agrees_with_ragged_path():
    g = np.random.default_rng(1)
    same = [g.normal(size=40) for _ in range(5)]
    ragged = same[:4] + [np.concatenate([same[4], [0.0]])]
    a = intervals(same, 0.7)
    b = intervals(ragged, 0.7)
    np.testing.assert_array_equal(a[:4], b[:4])


def test_report_formats_round_trip():
    rep = CalibrationReport(np.array([0.5, 0.9]), np.array([0.51, 0.88]), 100, 0.001, 1.5)
    back = CalibrationReport.from_csv(rep.to_csv(), 100)
    np.testing.assert_array_equal(back.picp, rep.picp)
    assert rep.to_csv().splitlines()[0] == "level,picp"
    txt = rep.to_table()
    assert "crossing rate" in txt and "n = 100" in txt
    svg = rep.to_svg()
    assert svg.startswith("<svg") and "<line" in svg and "<polyline" in svg


def test_crossing_rate_counts_descents():
    from conftest import location_scale_model
    up = location_scale_model([1.0], [0.0], [1.0], s=1.0)
    down = location_scale_model([1.0], [0.0], [1.0], s=-1.0)
    X = np.linspace(-1, 1, 7).reshape(-1, 1)
    assert crossing_rate(up, X) == 0.0
    assert crossing_rate(down, X) == 1.0
