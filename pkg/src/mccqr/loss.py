"""Tilted (pinball) loss and its composite average over a quantile grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantileGrid:
    """Strictly increasing quantile probabilities inside (0, 1)."""

    taus: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=np.float64).ravel()
        if taus.size < 1:
            raise ValueError("quantile grid must hold at least one tau")
        if np.any(taus <= 0.0) or np.any(taus >= 1.0):
            raise ValueError("every tau must lie strictly inside (0, 1)")
        if np.any(np.diff(taus) <= 0.0):
            raise ValueError("taus must be strictly increasing")
        taus.setflags(write=False)
        object.__setattr__(self, "taus", taus)

    @classmethod
    def equally_spaced(cls, K: int = 101) -> QuantileGrid:
        """tau_k = k / (K + 1) for k = 1..K."""
        if K < 1:
            raise ValueError("K must be >= 1")
        return cls(np.arange(1, K + 1, dtype=np.float64) / (K + 1))

    @property
    def K(self) -> int:
        return self.taus.size


def _check_tau(tau):
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0.0) or np.any(tau >= 1.0):
        raise ValueError(f"tau must lie strictly inside (0, 1), got {tau}")
    return tau


def tilted_loss(residual, tau):
    """rho_tau(eps) = tau*eps for eps >= 0, (tau - 1)*eps otherwise.

    Works elementwise on arrays; ``residual`` is y - yhat.
    """
    tau = _check_tau(tau)
    eps = np.asarray(residual, dtype=np.float64)
    out = np.where(eps >= 0.0, tau * eps, (tau - 1.0) * eps)
    return out if out.ndim else float(out)


def tilted_loss_subgrad(residual, tau):
    """d rho / d eps; the eps == 0 tie resolves to tau."""
    tau = _check_tau(tau)
    eps = np.asarray(residual, dtype=np.float64)
    out = np.where(eps >= 0.0, tau, tau - 1.0) + 0.0 * eps
    return out if out.ndim else float(out)


def _check_shapes(y, yhat, grid):
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64)
    if yhat.ndim != 2 or yhat.shape != (y.size, grid.K):
        raise ValueError(f"yhat must have shape ({y.size}, {grid.K}), got {yhat.shape}")
    return y, yhat


def composite_loss(y, yhat, grid: QuantileGrid) -> float:
    """Mean pinball loss over all N samples and K quantile heads."""
    y, yhat = _check_shapes(y, yhat, grid)
    eps = y[:, None] - yhat
    return float(np.mean(tilted_loss(eps, grid.taus[None, :])))


def composite_loss_grad(y, yhat, grid: QuantileGrid) -> np.ndarray:
    """Gradient of :func:`composite_loss` with respect to ``yhat``."""
    y, yhat = _check_shapes(y, yhat, grid)
    eps = y[:, None] - yhat
    return -tilted_loss_subgrad(eps, grid.taus[None, :]) / eps.size
