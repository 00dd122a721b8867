"""Dense linear algebra helpers and the seedable, splittable random stream.

All arrays are 64-bit floats. Every stochastic routine in the package takes an
explicit :class:`RngState`; there is no module-level random state.
"""

from __future__ import annotations

import copy

import numpy as np


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-d float64 array, raising on NaN/Inf."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite values")
    return m


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


class RngState:
    """Seeded random stream backed by numpy's PCG64.

    Sub-streams come from ``SeedSequence.spawn`` so ``split(k)`` is
    deterministic for a given parent and independent of how the children are
    consumed afterwards. Uniforms are the 53-bit doubles numpy produces from
    the raw 64-bit output, which is platform independent.

    Args:
        seed: 64-bit unsigned seed.
    """

    def __init__(self, seed: int = 0, *, _seq: np.random.SeedSequence | None = None):
        if _seq is None:
            if seed < 0 or seed >= 2**64:
                raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
            _seq = np.random.SeedSequence(int(seed))
        self._seq = _seq
        self._gen = np.random.Generator(np.random.PCG64(_seq))

    @property
    def seed(self):
        return self._seq.entropy

    def split(self, k: int) -> list[RngState]:
        if k < 0:
            raise ValueError("k must be non-negative")
        return [RngState(_seq=s) for s in self._seq.spawn(k)]

    def copy(self) -> RngState:
        """Independent clone that replays the same future output."""
        return copy.deepcopy(self)

    def uniform(self, n: int | tuple) -> np.ndarray:
        return self._gen.random(n)

    def normal(self, n: int) -> np.ndarray:
        # Box-Muller, both outputs kept: ceil(n/2) uniform pairs per call.
        m = (n + 1) // 2
        u = self._gen.random(2 * m)  # consecutive pairs, so shorter calls give a prefix
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))  # 1-u in (0,1], log finite
        theta = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def bernoulli_mask(self, n: int | tuple, p_drop: float) -> np.ndarray:
        """Array of 0.0/1.0 where each entry is 0 with probability ``p_drop``."""
        if not 0.0 <= p_drop < 1.0:
            raise ValueError(f"p_drop must lie in [0, 1), got {p_drop}")
        return (self._gen.random(n) >= p_drop).astype(np.float64)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def rng_uniform(state: RngState, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return state.uniform(n)


def rng_normal(state: RngState, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return state.normal(n)


def rng_bernoulli_mask(state: RngState, n: int, p_drop: float) -> np.ndarray:
    return state.bernoulli_mask(n, p_drop)
