import numpy as np
import pytest

from mccqr import RngState, SyntheticSpec, TrainConfig, generate, train


@pytest.fixture(scope="session")
def linear_data():
    Xtr, ytr, oracle, _ = generate(SyntheticSpec("linear-hetero", 5000, 1, seed=11))
    Xte, yte, _, _ = generate(SyntheticSpec("linear-hetero", 2000, 1, seed=12))
    return Xtr, ytr, Xte, yte, oracle


@pytest.fixture(scope="session")
def linear_model(linear_data):
    Xtr, ytr, *_ = linear_data
    return train(Xtr, ytr, TrainConfig(seed=0))


@pytest.fixture
def rng():
    return RngState(1234)


def random_params(rng: np.random.Generator, d, H, K, scale=1.0):
    from mccqr.model import NetworkParams
    return NetworkParams(rng.normal(size=(d, H)) * scale, rng.normal(size=H) * scale,
                         rng.normal(size=(H, K)) * scale, rng.normal(size=K) * scale)


def location_scale_model(weights, means, stds, c=0.0, s=1.0, K=101, dropout=0.0, big=100.0):
    """Hand-built network whose heads are c + w . xs + s * Phi^-1(tau_k).

    One hidden unit carries w . xs + big (kept positive by ``big``), so the
    ReLU is inactive as a nonlinearity and outputs are exactly linear.
    """
    from mccqr.loss import QuantileGrid
    from mccqr.model import MccqrModel, NetworkParams, Standardizer, TrainConfig
    from mccqr.special import norm_ppf
    w = np.asarray(weights, dtype=float)
    d = w.size
    grid = QuantileGrid.equally_spaced(K)
    z = np.array([norm_ppf(t) for t in grid.taus])
    params = NetworkParams(w.reshape(d, 1), np.array([big]), np.ones((1, K)), c - big + s * z)
    std = Standardizer(np.asarray(means, float), np.asarray(stds, float), (), d)
    return MccqrModel(params, grid, TrainConfig(K=K, hidden=1, dropout_rate=dropout), std)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
