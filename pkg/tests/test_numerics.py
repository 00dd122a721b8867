import numpy as np
import pytest

from mccqr.numerics import RngState, matmul, rng_bernoulli_mask, rng_normal, rng_uniform


def triple_loop(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0.0
            for k in range(a.shape[1]):
                s += a[i, k] * b[k, j]
            out[i, j] = s
    return out


def test_matmul_identity_and_hand_case():
    assert np.array_equal(matmul([[1, 0], [0, 1]], [[3, 4], [5, 6]]), [[3, 4], [5, 6]])
    assert np.array_equal(matmul([[1, 2]], [[3], [4]]), [[11]])


def test_matmul_matches_triple_loop():
    g = np.random.default_rng(0)
    a, b = g.normal(size=(5, 7)), g.normal(size=(7, 3))
    np.testing.assert_allclose(matmul(a, b), triple_loop(a, b), atol=1e-12)


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_associative():
    g = np.random.default_rng(1)
    for _ in range(10):
        a, b, c = g.normal(size=(4, 5)), g.normal(size=(5, 6)), g.normal(size=(6, 3))
        left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
        assert np.max(np.abs(left - right)) <= 1e-9 * np.max(np.abs(left))


def test_uniform_deterministic_and_in_range():
    a = rng_uniform(RngState(42), 3)
    b = rng_uniform(RngState(42), 3)
    assert np.array_equal(a, b)
    u = rng_uniform(RngState(42), 100_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert 0.49 <= u.mean() <= 0.51


def test_split_streams_differ_and_are_deterministic():
    s1, s2 = RngState(42).split(2)
    t1, t2 = RngState(42).split(2)
    a, b = s1.uniform(10), s2.uniform(10)
    assert not np.any(a == b)
    assert np.array_equal(a, t1.uniform(10))
    assert np.array_equal(b, t2.uniform(10))


def test_copy_replays_future_output():
    s = RngState(5)
    s.uniform(7)
    c = s.copy()
    assert np.array_equal(s.uniform(20), c.uniform(20))


def test_normal_moments():
    z = rng_normal(RngState(3), 100_000)
    assert -0.02 <= z.mean() <= 0.02
    assert 0.97 <= z.var() <= 1.03
    assert np.array_equal(z[:11], rng_normal(RngState(3), 11))  # prefix of the same pairs


def test_normal_split_streams_uncorrelated():
    a, b = RngState(9).split(2)
    r = np.corrcoef(rng_normal(a, 100_000), rng_normal(b, 100_000))[0, 1]
    assert abs(r) < 0.02


def test_bernoulli_mask():
    assert np.all(rng_bernoulli_mask(RngState(0), 1000, 0.0) == 1.0)
    m = rng_bernoulli_mask(RngState(0), 100_000, 0.2)
    assert set(np.unique(m)) <= {0.0, 1.0}
    assert 0.195 <= np.mean(m == 0) <= 0.205
    assert np.array_equal(m, rng_bernoulli_mask(RngState(0), 100_000, 0.2))
    for bad in (-0.1, 1.0):
        with pytest.raises(ValueError):
            rng_bernoulli_mask(RngState(0), 3, bad)


def test_seed_range():
    with pytest.raises(ValueError):
        RngState(-1)
    RngState(2**64 - 1).uniform(1)
