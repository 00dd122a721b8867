"""Comparators: LASSO by cyclic coordinate descent and a plain MAE-trained network."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .loss import QuantileGrid
from .model import FORMAT_VERSION, MccqrModel, Standardizer, TrainConfig, _check_xy, fit_network


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_objective(Xs, y, beta, intercept, lam) -> float:
    r = y - intercept - Xs @ beta
    return float(r @ r / (2.0 * y.size) + lam * np.sum(np.abs(beta)))


@dataclass(frozen=True)
class LassoModel:
    coefficients: np.ndarray   # on standardized features
    intercept: float
    lam: float
    standardizer: Standardizer
    objective_trace: tuple = field(default_factory=tuple)
    n_iter: int = 0
    model_type: str = "lasso"

    def predict(self, X) -> np.ndarray:
        return self.standardizer.transform(np.atleast_2d(X)) @ self.coefficients + self.intercept

    def to_dict(self) -> dict:
        s = self.standardizer
        return {
            "format_version": FORMAT_VERSION,
            "model_type": self.model_type,
            "lambda": self.lam,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "standardization": {"means": s.means.tolist(), "stds": s.stds.tolist(),
                                "dropped_columns": list(s.dropped_columns),
                                "n_features_in": s.n_features_in},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> LassoModel:
        st = doc["standardization"]
        s = Standardizer(np.array(st["means"], dtype=np.float64), np.array(st["stds"], dtype=np.float64),
                         tuple(st["dropped_columns"]), st["n_features_in"])
        return cls(np.array(doc["coefficients"], dtype=np.float64), doc["intercept"], doc["lambda"], s)


def lasso_fit(X, y, lam: float = 1.0, max_iters: int = 1000, tol: float = 1e-7,
              standardize: bool = True) -> LassoModel:
    """Minimize 1/(2N) ||y - b0 - X b||^2 + lam ||b||_1 by cyclic coordinate descent.

    Features are z-scored first (population std) unless ``standardize`` is
    False, in which case X is only centred. Stops when the largest coefficient
    change in a sweep falls below ``tol`` or after ``max_iters`` sweeps.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("lasso input contains non-finite values")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if standardize:
        st = Standardizer.fit(X)
    else:
        st = Standardizer(X.mean(axis=0), np.ones(X.shape[1]), (), X.shape[1])
    Xs = st.transform(X)
    N, p = Xs.shape
    b0 = float(y.mean())
    col_sq = np.einsum("ij,ij->j", Xs, Xs) / N
    beta = np.zeros(p)
    r = y - b0
    trace = [lasso_objective(Xs, y, beta, b0, lam)]
    it = 0
    for it in range(1, max_iters + 1):
        max_change = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            rho = Xs[:, j] @ r / N + col_sq[j] * old
            new = soft_threshold(rho, lam) / col_sq[j]
            if new != old:
                r -= Xs[:, j] * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        trace.append(lasso_objective(Xs, y, beta, b0, lam))
        if max_change < tol:
            break
    return LassoModel(beta, b0, lam, st, tuple(trace), it)


def l1_objective(y, out):
    eps = y[:, None] - out
    # subgradient of |eps| is 0 at eps == 0
    return float(np.mean(np.abs(eps))), -np.sign(eps) / eps.size


def ann_train(X, y, config: TrainConfig = TrainConfig()) -> MccqrModel:
    """Same network and recipe as MCCQR with a single head and mean-absolute-error loss."""
    X, y = _check_xy(X, y, config.batch_size)
    st = Standardizer.fit(X)
    params, trace = fit_network(st.transform(X), y, config, 1, l1_objective)
    return MccqrModel(params, QuantileGrid([0.5]), config, st, tuple(trace), model_type="ann")


def ann_predict(model: MccqrModel, X) -> np.ndarray:
    """Single deterministic forward pass, dropout off."""
    return model.heads(X)[:, 0]
