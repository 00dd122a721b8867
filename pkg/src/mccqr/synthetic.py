"""Synthetic regression data with known conditional quantiles.

linear-hetero: x0 ~ U(0, 2), y = 1 + 2 x0 + (0.5 + 0.4 x0) eps
sine-hetero:   x0 ~ U(0, 2), y = sin(2 x0) + (0.3 + 0.2 x0) eps
age-like:      age ~ U(20, 72), y = age, features = fixed projection of a
               smooth age basis plus Gaussian feature noise

Extra columns beyond x0 in the first two families are N(0, 1) noise. For
age-like the target is a deterministic function of the latent age, so the
oracle conditions on that latent age rather than on the noisy features.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .numerics import RngState
from .special import norm_ppf

FAMILIES = ("linear-hetero", "sine-hetero", "age-like")
AGE_RANGE = (20.0, 72.0)


@dataclass(frozen=True)
class SyntheticSpec:
    family: str = "linear-hetero"
    n: int = 1000
    d: int = 1
    seed: int = 0
    feature_noise: float = 1.0     # age-like only
    signal_scale: float = 0.2      # age-like only; std of the projection weights
    projection_seed: int = 20210   # age-like only; fixes the feature map across seeds

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")


@dataclass(frozen=True)
class Oracle:
    """Closed-form conditional quantile q*(tau | x) for one family."""

    family: str

    def location_scale(self, x0):
        x0 = np.asarray(x0, dtype=np.float64)
        if self.family == "linear-hetero":
            return 1.0 + 2.0 * x0, 0.5 + 0.4 * x0
        if self.family == "sine-hetero":
            return np.sin(2.0 * x0), 0.3 + 0.2 * x0
        return x0, np.zeros_like(x0)

    def quantile(self, x, tau: float):
        """q*(tau | x). ``x`` is a raw feature row/matrix (x0 in column 0), or the
        latent age for the age-like family."""
        if not 0.0 < tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {tau}")
        x = np.asarray(x, dtype=np.float64)
        x0 = x if self.family == "age-like" else x[..., 0]
        loc, scale = self.location_scale(x0)
        return loc + scale * norm_ppf(tau)


def oracle_quantile(handle: Oracle, x, tau: float):
    return handle.quantile(x, tau)


def age_basis(age) -> np.ndarray:
    u = (np.asarray(age, dtype=np.float64) - 46.0) / 15.0
    return np.column_stack([u, u * u - 1.0, np.sin(math.pi * u)])


def age_projection(d: int, projection_seed: int, signal_scale: float = 1.0) -> np.ndarray:
    return signal_scale * RngState(projection_seed).normal(3 * d).reshape(3, d)


def generate(spec: SyntheticSpec, rng: RngState | None = None):
    """Draw a dataset.

    Returns:
        (X (n, d), y (n,), Oracle, latent) where latent is x0 or the age.
    """
    rng = RngState(spec.seed) if rng is None else rng
    x_rng, noise_rng = rng.split(2)
    n, d = spec.n, spec.d
    oracle = Oracle(spec.family)
    if spec.family == "age-like":
        lo, hi = AGE_RANGE
        age = lo + (hi - lo) * x_rng.uniform(n)
        P = age_projection(d, spec.projection_seed, spec.signal_scale)
        X = age_basis(age) @ P + spec.feature_noise * noise_rng.normal(n * d).reshape(n, d)
        return X, age.copy(), oracle, age
    x0 = 2.0 * x_rng.uniform(n)
    X = np.empty((n, d))
    X[:, 0] = x0
    if d > 1:
        X[:, 1:] = x_rng.normal(n * (d - 1)).reshape(n, d - 1)
    loc, scale = oracle.location_scale(x0)
    y = loc + scale * noise_rng.normal(n)
    return X, y, oracle, x0


def oracle_spec_json(spec: SyntheticSpec) -> str:
    formulas = {
        "linear-hetero": "y = 1 + 2*x0 + (0.5 + 0.4*x0)*eps; q(tau|x) = 1 + 2*x0 + (0.5 + 0.4*x0)*Phi^-1(tau)",
        "sine-hetero": "y = sin(2*x0) + (0.3 + 0.2*x0)*eps; q(tau|x) = sin(2*x0) + (0.3 + 0.2*x0)*Phi^-1(tau)",
        "age-like": "y = age; features = basis(age) @ P + noise; q(tau|age) = age",
    }
    doc = dict(asdict(spec), formula=formulas[spec.family])
    return json.dumps(doc, indent=2, sort_keys=True)
