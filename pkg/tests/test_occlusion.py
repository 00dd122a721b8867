import warnings

import numpy as np
import pytest

from conftest import location_scale_model
from mccqr.numerics import RngState
from mccqr.occlusion import (WHOLE, RegionAtlas, _t_quantile, occlude, occlusion_deltas,
                             region_contrast_fit)
from mccqr.predict import UncertaintyMode, predict_distribution


def test_occlude_zeroes_raw_features_only():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(occlude(x, [1, 3]), [1.0, 0.0, 3.0, 0.0])
    np.testing.assert_array_equal(x, [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(occlude(x, []), x)
    with pytest.raises(IndexError):
        occlude(x, [4])


def test_atlas_validation_and_csv(tmp_path):
    with pytest.raises(IndexError):
        RegionAtlas.from_mapping({"a": [0, 5]}, 4)
    p = tmp_path / "atlas.csv"
    p.write_text("region_name,feature_index\nb,2\na,0\nb,3\na,1\n")
    atlas = RegionAtlas.read_csv(p, 4)
    assert atlas.names == ("b", "a")
    assert atlas.sizes.tolist() == [2, 2]


def test_t_quantile():
    assert _t_quantile(0.95, 1e6) == pytest.approx(1.959964, abs=1e-4)
    assert _t_quantile(0.95, 10) == pytest.approx(2.228139, abs=1e-5)


def planted_model():
    # feature 0 is raw N(2, 1); only it reaches the output
    return location_scale_model([1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [1.0] * 4, s=2.0)


def test_deltas_against_closed_form():
    m = planted_model()
    g = np.random.default_rng(0)
    X = g.normal(size=(50, 4))
    X[:, 0] += 2.0
    y = g.normal(size=50)
    atlas = RegionAtlas.from_mapping({"sig": [0, 1], "null": [2, 3]}, 4)
    res = occlusion_deltas(m, X, y, atlas, T=400, rng=RngState(1), mode=UncertaintyMode.ALEATORY)
    # occluding feature 0 moves xs0 to -2 (mean 2, std 1), so the median moves by -2 - xs0
    # and sigma is unchanged (same draws of tau, pure location shift)
    xs0 = X[:, 0] - 2.0
    sigma = np.empty(50)
    streams = RngState(1).split(50)
    for i in range(50):
        sigma[i] = predict_distribution(m, X[i], 400, UncertaintyMode.ALEATORY, streams[i].copy()).std
    np.testing.assert_allclose(res.delta[:, 0], (-2.0 - xs0) / sigma, rtol=1e-9)
    assert np.all(res.delta[:, 1] == 0.0)


def test_deltas_thread_independent_and_seeded():
    m = planted_model()
    X = np.random.default_rng(2).normal(size=(12, 4)) + [2, 0, 0, 0]
    atlas = RegionAtlas.from_mapping({"a": [0], "b": [1, 2, 3]}, 4)
    a = occlusion_deltas(m, X, np.zeros(12), atlas, T=100, rng=RngState(3))
    b = occlusion_deltas(m, X, np.zeros(12), atlas, T=100, rng=RngState(3), threads=3)
    np.testing.assert_array_equal(a.bagc_occluded, b.bagc_occluded)


def test_zero_sigma_is_an_error():
    m = location_scale_model([1.0, 0.0], [0.0, 0.0], [1.0, 1.0], s=0.0)
    atlas = RegionAtlas.from_mapping({"a": [0], "b": [1]}, 2)
    with pytest.raises(ValueError, match="sigma"):
        occlusion_deltas(m, np.zeros((2, 2)), np.zeros(2), atlas, T=10)


def test_long_csv_and_contrast_fit(tmp_path):
    m = planted_model()
    g = np.random.default_rng(4)
    n = 80
    X = g.normal(size=(n, 4)) + [2, 0, 0, 0]
    y = g.uniform(20, 70, n)
    atlas = RegionAtlas.from_mapping({"sig": [0, 1], "null": [2, 3]}, 4)
    res = occlusion_deltas(m, X, y, atlas, T=200, rng=RngState(5))
    cov = {"age": y, "site": g.integers(0, 3, n).astype(float)}
    path = tmp_path / "long.csv"
    res.write_long_csv(path, cov)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample_id,region,region_size,bag_corrected,age,site"
    assert len(lines) == 1 + n * 3
    assert lines[1].split(",")[1] == WHOLE
    with pytest.warns(RuntimeWarning, match="region_size"):
        fit = region_contrast_fit(res, cov, categorical=("site",))
    assert "region_size" in fit.dropped
    # balanced design: each contrast is the mean within-sample difference
    np.testing.assert_allclose(fit.estimate, res.delta.mean(axis=0), atol=1e-10)
    assert abs(fit.estimate[1]) < 1e-12
    assert fit.ci_low[0] < fit.estimate[0] < fit.ci_high[0]
    s = fit.summary()
    assert s["reference"] == WHOLE and [r["region"] for r in s["regions"]] == ["sig", "null"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        region_contrast_fit(res, cov, categorical=("site",), include_region_size=False)
