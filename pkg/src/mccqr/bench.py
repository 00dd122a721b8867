"""K-fold comparison of MCCQR, the MAE network and LASSO by median absolute error."""

from __future__ import annotations

import numpy as np

from .baselines import ann_predict, ann_train, lasso_fit
from .calibration import median_abs_error
from .model import TrainConfig, train
from .numerics import RngState
from .predict import UncertaintyMode, predict_batch, summarize

MODELS = ("mccqr", "ann", "lasso")


def fold_assignment(n: int, k: int, rng: RngState, groups=None) -> np.ndarray:
    """Fold index per row: seeded shuffled k-fold, or one fold per group level."""
    if groups is not None:
        _, idx = np.unique(np.asarray(groups), return_inverse=True)
        return idx
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= folds <= n, got folds={k}, n={n}")
    folds = np.empty(n, dtype=int)
    folds[rng.permutation(n)] = np.arange(n) % k
    return folds


def fit_predict(name: str, Xtr, ytr, Xte, config: TrainConfig, draws: int, rng: RngState):
    if name == "mccqr":
        model = train(Xtr, ytr, config)
        return summarize(predict_batch(model, Xte, draws, UncertaintyMode.FULL, rng))[0]
    if name == "ann":
        return ann_predict(ann_train(Xtr, ytr, config), Xte)
    if name == "lasso":
        return lasso_fit(Xtr, ytr).predict(Xte)
    raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")


def cross_validate(X, y, models=MODELS, folds: int = 5, seed: int = 0, groups=None,
                   config: TrainConfig | None = None, draws: int = 1000) -> dict:
    """Per-model list of fold-wise median absolute errors."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    fold_rng, pred_rng = RngState(seed).split(2)
    config = config or TrainConfig(seed=seed)
    assign = fold_assignment(y.size, folds, fold_rng, groups)
    n_folds = int(assign.max()) + 1
    pred_streams = pred_rng.split(n_folds)
    out = {m: [] for m in models}
    for f in range(n_folds):
        te = assign == f
        for m in models:
            pred = fit_predict(m, X[~te], y[~te], X[te], config, draws, pred_streams[f].copy())
            out[m].append(median_abs_error(y[te], pred))
    return out


def bench_table(results: dict) -> str:
    lines = [f"{'model':<8}{'median AE':>11}{'(std)':>9}  folds"]
    for m, errs in results.items():
        e = np.asarray(errs)
        lines.append(f"{m.upper():<8}{e.mean():>11.3f}{'(%.2f)' % e.std():>9}  {len(e)}")
    return "\n".join(lines)
