"""One-hidden-layer ReLU network with K quantile heads, trained with Adam.

Dropout sits on the hidden layer only and uses the inverted convention: kept
units are scaled by 1/(1 - p) whenever a mask is supplied, both during
training and for Monte-Carlo draws at prediction time.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .loss import QuantileGrid, composite_loss, composite_loss_grad
from .numerics import RngState

FORMAT_VERSION = 1


class NumericalError(ArithmeticError):
    """Raised when training produces a non-finite loss or parameter."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.01
    batch_size: int = 64
    dropout_rate: float = 0.2
    K: int = 101
    hidden: int = 32
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.K < 1 or self.hidden < 1:
            raise ValueError("K and hidden must be >= 1")


@dataclass
class NetworkParams:
    W1: np.ndarray  # (d, H)
    b1: np.ndarray  # (H,)
    W2: np.ndarray  # (H, K)
    b2: np.ndarray  # (K,)

    NAMES = ("W1", "b1", "W2", "b2")

    @property
    def d(self) -> int:
        return self.W1.shape[0]

    @property
    def H(self) -> int:
        return self.W1.shape[1]

    @property
    def K(self) -> int:
        return self.W2.shape[1]

    @property
    def n_params(self) -> int:
        return sum(getattr(self, n).size for n in self.NAMES)

    def arrays(self):
        return [getattr(self, n) for n in self.NAMES]

    def map(self, fn, *others: NetworkParams) -> NetworkParams:
        return NetworkParams(*(fn(a, *(o.arrays()[i] for o in others))
                               for i, a in enumerate(self.arrays())))

    def copy(self) -> NetworkParams:
        return self.map(np.array)

    def zeros_like(self) -> NetworkParams:
        return self.map(np.zeros_like)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def parameter_count(d: int, H: int = 32, K: int = 101) -> int:
    """Trainable parameters of a d -> H -> K network (weights plus biases)."""
    return d * H + H + H * K + K


def init_params(d: int, H: int, K: int, rng: RngState) -> NetworkParams:
    """He-uniform weights, bound sqrt(6 / fan_in); zero biases."""
    if min(d, H, K) < 1:
        raise ValueError("d, H and K must all be >= 1")
    b_in = math.sqrt(6.0 / d)
    b_hid = math.sqrt(6.0 / H)
    W1 = (2.0 * rng.uniform(d * H) - 1.0).reshape(d, H) * b_in
    W2 = (2.0 * rng.uniform(H * K) - 1.0).reshape(H, K) * b_hid
    return NetworkParams(W1, np.zeros(H), W2, np.zeros(K))


def _hidden(params, x, mask, dropout_rate):
    z = x @ params.W1 + params.b1
    h = np.maximum(z, 0.0)
    if mask is not None:
        if np.shape(mask)[-1] != params.H:
            raise ValueError(f"mask length {np.shape(mask)[-1]} does not match H={params.H}")
        h = h * mask / (1.0 - dropout_rate)
    return z, h


def forward(params: NetworkParams, x, mask=None, dropout_rate: float = 0.0) -> np.ndarray:
    """Quantile-head outputs for standardized input ``x``.

    ``x`` may be a single vector (d,) or a batch (N, d); ``mask`` broadcasts the
    same way against the hidden layer.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.d:
        raise ValueError(f"input has {x.shape[-1]} features, network expects {params.d}")
    _, h = _hidden(params, x, mask, dropout_rate)
    return h @ params.W2 + params.b2


def batch_gradients(params: NetworkParams, X, masks, out_grad_fn, dropout_rate: float):
    """Loss and parameter gradients for a mini-batch.

    Args:
        X: standardized inputs, shape (N, d).
        masks: dropout masks (N, H), or None for a deterministic pass.
        out_grad_fn: callable mapping outputs (N, K) to (loss, dloss/doutputs).
        dropout_rate: scaling used with ``masks``.

    Returns:
        (loss, NetworkParams of gradients)
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    z, h = _hidden(params, X, masks, dropout_rate)
    out = h @ params.W2 + params.b2
    loss, G = out_grad_fn(out)
    dW2 = h.T @ G
    db2 = G.sum(axis=0)
    dh = G @ params.W2.T
    if masks is not None:
        dh = dh * masks / (1.0 - dropout_rate)
    dz = dh * (z > 0.0)
    dW1 = X.T @ dz
    db1 = dz.sum(axis=0)
    return loss, NetworkParams(dW1, db1, dW2, db2)


def backprop(params: NetworkParams, x, mask, y: float, grid: QuantileGrid,
             dropout_rate: float = 0.0) -> NetworkParams:
    """Exact gradients of the single-sample composite loss."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    m = None if mask is None else np.asarray(mask, dtype=np.float64).reshape(1, -1)
    yv = np.array([float(y)])

    def fn(out):
        return composite_loss(yv, out, grid), composite_loss_grad(yv, out, grid)

    return batch_gradients(params, x, m, fn, dropout_rate)[1]


def adam_step(params: NetworkParams, grads: NetworkParams, moments, t: int, config: TrainConfig):
    """One bias-corrected Adam update; ``t`` counts from 1.

    Returns:
        (new_params, (m, v))
    """
    b1, b2, eps, lr = config.adam_beta1, config.adam_beta2, config.adam_eps, config.learning_rate
    m, v = moments
    m = m.map(lambda a, g: b1 * a + (1.0 - b1) * g, grads)
    v = v.map(lambda a, g: b2 * a + (1.0 - b2) * g * g, grads)
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new = params.map(lambda p, mm, vv: p - lr * (mm / c1) / (np.sqrt(vv / c2) + eps), m, v)
    return new, (m, v)


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-scoring fitted on training data, zero-variance columns dropped."""

    means: np.ndarray
    stds: np.ndarray
    dropped_columns: tuple = ()
    n_features_in: int = 0

    @classmethod
    def fit(cls, X) -> Standardizer:
        X = np.asarray(X, dtype=np.float64)
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        const = sd <= 1e-12 * np.maximum(1.0, np.abs(mu))
        keep = ~const
        return cls(mu[keep], sd[keep], tuple(int(i) for i in np.flatnonzero(const)), X.shape[1])

    @property
    def kept_columns(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_features_in), np.asarray(self.dropped_columns, dtype=int))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.n_features_in:
            raise ValueError(f"expected {self.n_features_in} features, got {X.shape[-1]}")
        if self.dropped_columns:
            X = X[..., self.kept_columns]
        return (X - self.means) / self.stds


def _check_xy(X, y, batch_size):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise ValueError(f"X must be 2-d, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("cannot train on zero samples")
    if X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} entries")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data contains non-finite values")
    if X.shape[0] < batch_size:
        raise ValueError(f"need at least batch_size={batch_size} samples, got {X.shape[0]}")
    if np.all(y == y[0]):
        warnings.warn("target is constant; fitting anyway", RuntimeWarning, stacklevel=3)
    return X, y


def fit_network(Xs, y, config: TrainConfig, K: int, loss_fn):
    """Mini-batch Adam on standardized inputs with hidden-layer dropout.

    ``loss_fn(y_batch, out)`` returns (loss, dloss/dout). The RNG derived from
    ``config.seed`` is split into initialization, shuffling and dropout streams.

    Returns:
        (params, loss_trace)
    """
    N, d = Xs.shape
    init_rng, shuffle_rng, drop_rng = RngState(config.seed).split(3)
    params = init_params(d, config.hidden, K, init_rng)
    moments = (params.zeros_like(), params.zeros_like())
    p = config.dropout_rate
    trace = []
    t = 0
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(N)
        total = 0.0
        for start in range(0, N, config.batch_size):
            idx = order[start:start + config.batch_size]
            masks = drop_rng.bernoulli_mask((idx.size, config.hidden), p) if p > 0 else None
            yb = y[idx]
            loss, grads = batch_gradients(params, Xs[idx], masks, lambda out: loss_fn(yb, out), p)
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch + 1}")
            t += 1
            params, moments = adam_step(params, grads, moments, t, config)
            total += loss * idx.size
        if not params.all_finite():
            raise NumericalError(f"non-finite parameters after epoch {epoch + 1}")
        trace.append(total / N)
    return params, trace


def _freeze(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MccqrModel:
    params: NetworkParams
    grid: QuantileGrid
    config: TrainConfig
    standardizer: Standardizer
    loss_trace: tuple = field(default_factory=tuple)
    model_type: str = "mccqr"

    def __post_init__(self):
        object.__setattr__(self, "params", self.params.map(_freeze))

    @property
    def dropout_rate(self) -> float:
        return self.config.dropout_rate

    @property
    def n_params(self) -> int:
        return self.params.n_params

    def heads(self, X) -> np.ndarray:
        """Deterministic (maskless) quantile heads for raw inputs, (N, K)."""
        return forward(self.params, self.standardizer.transform(np.atleast_2d(X)))

    def to_dict(self) -> dict:
        p = self.params
        c = self.config
        return {
            "format_version": FORMAT_VERSION,
            "model_type": self.model_type,
            "d": p.d,
            "H": p.H,
            "K": p.K,
            "taus": self.grid.taus.tolist(),
            "dropout_rate": c.dropout_rate,
            "standardization": {
                "means": self.standardizer.means.tolist(),
                "stds": self.standardizer.stds.tolist(),
                "dropped_columns": list(self.standardizer.dropped_columns),
                "n_features_in": self.standardizer.n_features_in,
            },
            "W1": p.W1.tolist(),
            "b1": p.b1.tolist(),
            "W2": p.W2.tolist(),
            "b2": p.b2.tolist(),
            "train_meta": {
                "seed": c.seed,
                "epochs": c.epochs,
                "lr": c.learning_rate,
                "batch": c.batch_size,
                "loss_trace": list(self.loss_trace),
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> MccqrModel:
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {doc.get('format_version')!r}")
        d, H, K = doc["d"], doc["H"], doc["K"]
        params = NetworkParams(
            np.array(doc["W1"], dtype=np.float64).reshape(d, H),
            np.array(doc["b1"], dtype=np.float64).reshape(H),
            np.array(doc["W2"], dtype=np.float64).reshape(H, K),
            np.array(doc["b2"], dtype=np.float64).reshape(K),
        )
        st = doc["standardization"]
        meta = doc["train_meta"]
        config = TrainConfig(epochs=meta["epochs"], learning_rate=meta["lr"], batch_size=meta["batch"],
                             dropout_rate=doc["dropout_rate"], K=K, hidden=H, seed=meta["seed"])
        standardizer = Standardizer(np.array(st["means"], dtype=np.float64),
                                    np.array(st["stds"], dtype=np.float64),
                                    tuple(st["dropped_columns"]), st["n_features_in"])
        return cls(params, QuantileGrid(doc["taus"]), config, standardizer,
                   tuple(meta["loss_trace"]), doc.get("model_type", "mccqr"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> MccqrModel:
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def composite_objective(grid: QuantileGrid):
    def fn(y, out):
        return composite_loss(y, out, grid), composite_loss_grad(y, out, grid)
    return fn


def train(X, y, config: TrainConfig = TrainConfig()) -> MccqrModel:
    """Fit an MCCQR network on raw features ``X`` (N, d) and targets ``y``."""
    X, y = _check_xy(X, y, config.batch_size)
    standardizer = Standardizer.fit(X)
    if standardizer.means.size == 0:
        raise ValueError("every feature has zero variance")
    grid = QuantileGrid.equally_spaced(config.K)
    params, trace = fit_network(standardizer.transform(X), y, config, grid.K, composite_objective(grid))
    return MccqrModel(params, grid, config, standardizer, tuple(trace))


def with_params(model: MccqrModel, **arrays) -> MccqrModel:
    """Copy of ``model`` with some parameter blocks replaced."""
    p = model.params
    new = NetworkParams(*(arrays.get(n, getattr(p, n)) for n in NetworkParams.NAMES))
    return replace(model, params=new)
