"""Prediction-interval coverage (PICP), quantile-crossing audit, median absolute error."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

DEFAULT_LEVELS = tuple(round(0.05 * k, 2) for k in range(1, 20))


def _draw_matrix(dists):
    if len(dists) == 0:
        raise ValueError("no predictive distributions given")
    return [np.asarray(getattr(d, "draws", d), dtype=np.float64) for d in dists]


def central_interval(draws, level: float):
    """Equal-tailed interval from type-7 empirical quantiles of ``draws``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    lo, hi = np.quantile(draws, [(1.0 - level) / 2.0, (1.0 + level) / 2.0], method="linear")
    return float(lo), float(hi)


def intervals(dists, level: float) -> np.ndarray:
    """(N, 2) array of central interval bounds."""
    draws = _draw_matrix(dists)
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if len({d.size for d in draws}) == 1:
        q = np.quantile(np.vstack(draws), [(1.0 - level) / 2.0, (1.0 + level) / 2.0],
                        axis=1, method="linear")
        return q.T
    return np.array([central_interval(d, level) for d in draws])


def coverage(y, bounds) -> float:
    """Fraction of ``y`` inside inclusive [lo, hi] bounds."""
    y = np.asarray(y, dtype=np.float64).ravel()
    bounds = np.asarray(bounds, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty input")
    if bounds.shape != (y.size, 2):
        raise ValueError(f"bounds shape {bounds.shape} does not match {y.size} targets")
    return float(np.mean((y >= bounds[:, 0]) & (y <= bounds[:, 1])))


def picp(dists, y, level: float) -> float:
    """Prediction interval coverage probability at nominal ``level``."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(dists) != y.size:
        raise ValueError(f"{len(dists)} distributions but {y.size} targets")
    return coverage(y, intervals(dists, level))


def median_abs_error(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_true.size == 0:
        raise ValueError("empty input")
    if y_true.size != y_pred.size:
        raise ValueError("y_true and y_pred differ in length")
    return float(np.median(np.abs(y_true - y_pred)))


@dataclass
class CalibrationReport:
    levels: np.ndarray
    picp: np.ndarray
    n: int
    crossing_rate: float = float("nan")
    mae_median: float = float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "picp"])
        for lv, p in zip(self.levels, self.picp):
            w.writerow([repr(float(lv)), repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n: int = 0) -> CalibrationReport:
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(np.array([float(r["level"]) for r in rows]),
                   np.array([float(r["picp"]) for r in rows]), n)

    def to_table(self) -> str:
        lines = [f"{'level':>7}  {'picp':>7}  {'diff':>7}"]
        for lv, p in zip(self.levels, self.picp):
            lines.append(f"{lv:7.3f}  {p:7.4f}  {p - lv:+7.4f}")
        lines.append(f"n = {self.n}")
        if np.isfinite(self.mae_median):
            lines.append(f"median absolute error = {self.mae_median:.4f}")
        if np.isfinite(self.crossing_rate):
            lines.append(f"crossing rate = {self.crossing_rate:.6f}")
        return "\n".join(lines)

    def to_svg(self, width: int = 360, height: int = 360) -> str:
        """PICP against nominal level, with the identity line as reference."""
        pad = 40
        sx = lambda v: pad + v * (width - 2 * pad)  # noqa: E731
        sy = lambda v: height - pad - v * (height - 2 * pad)  # noqa: E731
        pts = " ".join(f"{sx(lv):.2f},{sy(p):.2f}" for lv, p in zip(self.levels, self.picp))
        return "\n".join([
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
            f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
            'fill="none" stroke="#999"/>',
            f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" stroke="black"/>',
            f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="2"/>',
            f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">nominal level</text>',
            f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
            'text-anchor="middle">PICP</text>',
            "</svg>",
        ])


def picp_curve(dists, y, levels=DEFAULT_LEVELS, crossing: float = float("nan")) -> CalibrationReport:
    levels = np.asarray(levels, dtype=np.float64)
    if np.any(levels <= 0) or np.any(levels >= 1) or np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing inside (0, 1)")
    draws = _draw_matrix(dists)
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(draws) != y.size:
        raise ValueError(f"{len(draws)} distributions but {y.size} targets")
    cov = np.array([picp(draws, y, lv) for lv in levels])
    medians = np.array([np.median(d) for d in draws])
    return CalibrationReport(levels, cov, y.size, crossing, median_abs_error(y, medians))


def crossing_rate(model, X, rng=None) -> float:
    """Fraction of adjacent head pairs with heads[k+1] < heads[k] - 1e-12.

    Evaluated on deterministic forward passes, so ``rng`` is accepted for
    interface symmetry but never consumed.
    """
    heads = model.heads(X)
    if heads.shape[1] < 2:
        return 0.0
    return float(np.mean(np.diff(heads, axis=1) < -1e-12))
