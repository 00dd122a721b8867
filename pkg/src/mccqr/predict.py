"""Monte-Carlo predictive distributions from a trained MCCQR model.

Each draw samples tau ~ Uniform(0, 1) and a fresh hidden-layer dropout mask,
runs a forward pass, and linearly interpolates the K quantile heads at tau.
Per draw the stream is consumed as: T uniforms for tau first, then T x H
uniforms for the masks (only in modes with dropout).
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .loss import QuantileGrid
from .model import MccqrModel
from .numerics import RngState


class UncertaintyMode(enum.Enum):
    FULL = "full"
    ALEATORY = "aleatory"
    EPISTEMIC = "epistemic"

    @property
    def random_tau(self) -> bool:
        return self is not UncertaintyMode.EPISTEMIC

    @property
    def dropout(self) -> bool:
        return self is not UncertaintyMode.ALEATORY


@dataclass(frozen=True)
class PredictiveDistribution:
    draws: np.ndarray

    @property
    def T(self) -> int:
        return self.draws.size

    @property
    def median(self) -> float:
        return float(np.median(self.draws))

    @property
    def std(self) -> float:
        # population std
        return float(np.std(self.draws))

    def quantile(self, q):
        """Type-7 (linear order-statistic) empirical quantile of the draws."""
        return np.quantile(self.draws, q, method="linear")


def interpolate_quantile(heads, grid: QuantileGrid, tau: float) -> float:
    """Piecewise-linear interpolation of heads over the grid, clamped at the ends."""
    heads = np.asarray(heads, dtype=np.float64)
    if grid.K < 2:
        raise ValueError("interpolation needs at least two quantile heads")
    if heads.shape != (grid.K,):
        raise ValueError(f"expected {grid.K} heads, got shape {heads.shape}")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return float(np.interp(tau, grid.taus, heads))


def interpolate_rows(heads: np.ndarray, taus_grid: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Row-wise version of :func:`interpolate_quantile`: row i evaluated at tau[i]."""
    K = taus_grid.size
    t = np.clip(tau, taus_grid[0], taus_grid[-1])
    j = np.clip(np.searchsorted(taus_grid, t, side="right") - 1, 0, K - 2)
    lo, hi = taus_grid[j], taus_grid[j + 1]
    w = (t - lo) / (hi - lo)
    rows = np.arange(heads.shape[0])
    return heads[rows, j] * (1.0 - w) + heads[rows, j + 1] * w


def paired_draws(model: MccqrModel, xs: np.ndarray, T: int, mode: UncertaintyMode,
                 rng: RngState) -> np.ndarray:
    """Draws for M standardized inputs (M, d) sharing one set of taus and masks.

    Returns an (M, T) array; row m is exactly what a single-input call with
    the same ``rng`` state would produce for ``xs[m]``.
    """
    xs = np.atleast_2d(xs)
    M = xs.shape[0]
    params = model.params
    taus = rng.uniform(T)
    if not mode.random_tau:
        taus = np.full(T, 0.5)
    p = model.dropout_rate
    z = xs @ params.W1 + params.b1
    h = np.maximum(z, 0.0)
    if mode.dropout and p > 0:
        masks = rng.bernoulli_mask((T, params.H), p)
        hd = h[:, None, :] * masks[None, :, :] / (1.0 - p)
        heads = hd @ params.W2 + params.b2
    else:
        heads = np.broadcast_to((h @ params.W2 + params.b2)[:, None, :], (M, T, params.K))
    flat = interpolate_rows(heads.reshape(M * T, params.K), model.grid.taus, np.tile(taus, M))
    return flat.reshape(M, T)


def predict_distribution(model: MccqrModel, x, T: int = 1000,
                         mode: UncertaintyMode = UncertaintyMode.FULL,
                         rng: RngState | None = None) -> PredictiveDistribution:
    """T Monte-Carlo draws for one raw-space input ``x``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    mode = UncertaintyMode(mode)
    rng = RngState(0) if rng is None else rng
    x = np.asarray(x, dtype=np.float64).ravel()
    xs = model.standardizer.transform(x)
    return PredictiveDistribution(paired_draws(model, xs, T, mode, rng)[0])


def predict_batch(model: MccqrModel, X, T: int = 1000,
                  mode: UncertaintyMode = UncertaintyMode.FULL,
                  rng: RngState | None = None, threads: int = 1) -> list[PredictiveDistribution]:
    """Per-row predictive distributions; row i uses the i-th split of ``rng``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(0, -1) if X.size == 0 else X.reshape(1, -1)
    n = X.shape[0]
    if n == 0:
        return []
    rng = RngState(0) if rng is None else rng
    streams = rng.split(n)

    def one(i):
        return predict_distribution(model, X[i], T, mode, streams[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, range(n)))
    return [one(i) for i in range(n)]


def summarize(dists) -> tuple[np.ndarray, np.ndarray]:
    """(medians, stds) arrays for a list of distributions."""
    return (np.array([d.median for d in dists]), np.array([d.std for d in dists]))
