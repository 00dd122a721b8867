"""Brain-age gaps, uncertainty correction, and OLS association tests.

The corrected gap divides the raw gap (prediction minus chronological age) by
the standard deviation of the individual's predictive distribution. Tests fit
``response ~ 1 + covariates + predictor`` and compare against the model
without the predictor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .special import f_sf, t_sf2

AGE = "age"


@dataclass(frozen=True)
class GapRecord:
    y_true: float
    y_pred: float
    sigma: float
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def bag(self) -> float:
        return self.y_pred - self.y_true

    @property
    def bag_corrected(self) -> float:
        return self.bag / self.sigma


def compute_gaps(dists, y, covariates=None) -> list[GapRecord]:
    """Gap records from predictive distributions and true targets.

    Args:
        dists: sequence of PredictiveDistribution (median and std are used).
        y: true targets, same length.
        covariates: optional mapping name -> sequence of per-sample values.
    """
    medians = [d.median for d in dists]
    sigmas = [d.std for d in dists]
    return gaps_from_arrays(y, medians, sigmas, covariates)


def gaps_from_arrays(y_true, y_pred, sigma, covariates=None) -> list[GapRecord]:
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    sigma = np.asarray(sigma, dtype=np.float64).ravel()
    if not (y_true.size == y_pred.size == sigma.size):
        raise ValueError(f"length mismatch: y_true {y_true.size}, y_pred {y_pred.size}, sigma {sigma.size}")
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        raise ValueError(f"sigma must be positive; sample {int(bad[0])} has sigma={sigma[bad[0]]}")
    covariates = dict(covariates or {})
    cols = {}
    for name, vals in covariates.items():
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if vals.size != y_true.size:
            raise ValueError(f"covariate {name!r} has {vals.size} values, expected {y_true.size}")
        cols[name] = vals
    return [GapRecord(float(y_true[i]), float(y_pred[i]), float(sigma[i]),
                      {k: float(v[i]) for k, v in cols.items()})
            for i in range(y_true.size)]


class RankDeficientError(ValueError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design is rank deficient; dependent columns: {', '.join(self.columns)}")


@dataclass
class OlsFit:
    names: list
    coefficients: np.ndarray
    se: np.ndarray
    rss: float
    dof: int
    F: np.ndarray
    p: np.ndarray
    partial_eta_sq: np.ndarray

    def term(self, name: str) -> dict:
        j = self.names.index(name)
        return {"term": name, "estimate": float(self.coefficients[j]), "se": float(self.se[j]),
                "F": float(self.F[j]), "df1": 1, "df2": self.dof, "p": float(self.p[j]),
                "partial_eta_sq": float(self.partial_eta_sq[j])}

    def terms(self) -> list[dict]:
        return [self.term(n) for n in self.names]


def dependent_columns(design, tol: float = 1e-9) -> list[int]:
    """Indices of columns lying (numerically) in the span of earlier columns."""
    design = np.asarray(design, dtype=np.float64)
    basis = np.empty((design.shape[0], 0))
    out = []
    for j in range(design.shape[1]):
        x = design[:, j]
        nx = np.linalg.norm(x)
        r = x.copy()
        for _ in range(2):  # re-orthogonalize once for stability
            r -= basis @ (basis.T @ r)
        nr = np.linalg.norm(r)
        if nx == 0.0 or nr <= tol * nx:
            out.append(j)
        else:
            basis = np.column_stack([basis, r / nr])
    return out


def ols_fit(design, response, names=None) -> OlsFit:
    """Least squares through a Householder QR of the design.

    Each term's F is the squared Wald t (df1 = 1), equal to the F from dropping
    that single column. Raises :class:`RankDeficientError` on collinearity.
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64).ravel()
    n, p = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(p)]
    if n <= p:
        raise ValueError(f"need more rows than columns, got {n} x {p}")
    if y.size != n:
        raise ValueError(f"response has {y.size} entries, design has {n} rows")
    Q, R = np.linalg.qr(X)
    norms = np.linalg.norm(X, axis=0)
    if np.any(np.abs(np.diag(R)) <= 1e-9 * np.maximum(norms, 1e-300)):
        raise RankDeficientError([names[j] for j in dependent_columns(X)])
    beta = solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    dof = n - p
    Rinv = solve_triangular(R, np.eye(p))
    var = np.sum(Rinv * Rinv, axis=1) * rss / dof
    se = np.sqrt(var)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, 0.0)
    F = t * t
    pvals = np.array([t_sf2(tj, dof) for tj in t])
    eta = F / (F + dof)
    return OlsFit(names, beta, se, rss, dof, F, pvals, eta)


def _covariate_columns(records, name, categorical):
    vals = np.array([r.covariates[name] for r in records], dtype=np.float64)
    if name not in categorical:
        return [name], [vals]
    levels = np.unique(vals)
    return ([f"{name}[{lv:g}]" for lv in levels[1:]],
            [(vals == lv).astype(np.float64) for lv in levels[1:]])


def build_design(records, terms, categorical=()):
    names, cols = ["intercept"], [np.ones(len(records))]
    for t in terms:
        if t not in records[0].covariates:
            raise KeyError(f"covariate {t!r} not present in records")
        n, c = _covariate_columns(records, t, set(categorical))
        names += n
        cols += c
    return np.column_stack(cols), names


@dataclass
class AssociationResult:
    response: str
    predictor: str
    F: float
    df1: int
    df2: int
    p: float
    partial_eta_sq: float
    estimate: float
    full: OlsFit

    def summary(self) -> dict:
        return {"response": self.response, "term": self.predictor, "estimate": self.estimate,
                "F": self.F, "df1": self.df1, "df2": self.df2, "p": self.p,
                "partial_eta_sq": self.partial_eta_sq,
                "terms": self.full.terms()}


def association_test(records, predictor: str, covariates=(), responses=("bag", "bag_corrected"),
                     categorical=()) -> dict:
    """Partial F test for ``predictor`` on raw and/or corrected gaps.

    Age is added to the covariates whenever the records carry it. A
    categorical predictor with more than two levels is tested jointly.

    Returns:
        dict mapping response name ('bag', 'bag_corrected') to AssociationResult.
    """
    if not records:
        raise ValueError("no records")
    covs = [c for c in covariates if c != predictor]
    if AGE in records[0].covariates and AGE not in covs and predictor != AGE:
        covs = [AGE] + covs
    Xr, _ = build_design(records, covs, categorical)
    Xf, names = build_design(records, covs + [predictor], categorical)
    df1 = Xf.shape[1] - Xr.shape[1]
    out = {}
    for resp in responses:
        y = np.array([getattr(r, resp) for r in records])
        full = ols_fit(Xf, y, names)
        reduced = ols_fit(Xr, y)
        df2 = full.dof
        F = ((reduced.rss - full.rss) / df1) / (full.rss / df2)
        F = max(F, 0.0)
        eta = F * df1 / (F * df1 + df2)
        est = float(full.coefficients[-1])
        out[resp] = AssociationResult(resp, predictor, float(F), df1, df2, f_sf(F, df1, df2),
                                      float(eta), est, full)
    return out


def association_json(results: dict) -> str:
    return json.dumps({k: v.summary() for k, v in results.items()}, indent=2)


def association_table(results: dict) -> str:
    lines = [f"{'response':<14}{'term':<12}{'estimate':>11}{'F':>10}{'df1':>5}{'df2':>7}{'p':>10}{'eta2_p':>10}"]
    for r in results.values():
        lines.append(f"{r.response:<14}{r.predictor:<12}{r.estimate:>11.4g}{r.F:>10.4f}{r.df1:>5d}"
                     f"{r.df2:>7d}{r.p:>10.4g}{r.partial_eta_sq:>10.4g}")
    return "\n".join(lines)


def subgroup_mae(records, group: str) -> dict:
    """Median absolute error per subgroup, raw and divided by the subgroup's age std.

    The second figure is one reading of "standardized MAE"; it uses the
    population std of y_true within the subgroup.
    """
    g = np.array([r.covariates[group] for r in records])
    err = np.array([abs(r.bag) for r in records])
    yt = np.array([r.y_true for r in records])
    out = {}
    for lv in np.unique(g):
        sel = g == lv
        mae = float(np.median(err[sel]))
        sd = float(np.std(yt[sel]))
        out[float(lv)] = {"n": int(sel.sum()), "mae": mae,
                          "mae_over_std": mae / sd if sd > 0 else float("nan")}
    return out


def gap_age_correlation(records) -> tuple[float, float]:
    """Pearson r of (bag, y_true) and (bag_corrected, y_true)."""
    yt = np.array([r.y_true for r in records])
    b = np.array([r.bag for r in records])
    bc = np.array([r.bag_corrected for r in records])
    return float(np.corrcoef(b, yt)[0, 1]), float(np.corrcoef(bc, yt)[0, 1])
