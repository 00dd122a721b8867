"""Occlusion-sensitivity mapping with a treatment-contrast regression.

Each region's features are zeroed in raw space (so they enter the network as
-mean/std after standardization) and the uncertainty-corrected gap is compared
with the un-occluded prediction. Full and occluded passes of the same sample
share one random stream, so deltas carry no Monte-Carlo noise from the draws
themselves.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .gaps import dependent_columns, ols_fit
from .numerics import RngState
from .predict import UncertaintyMode, paired_draws
from .special import t_sf2

WHOLE = "whole_brain"


@dataclass(frozen=True)
class RegionAtlas:
    names: tuple
    indices: tuple  # tuple of int arrays
    d: int

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("region names must be unique")
        idx = tuple(np.asarray(ix, dtype=int).ravel() for ix in self.indices)
        for name, ix in zip(self.names, idx):
            if ix.size and (ix.min() < 0 or ix.max() >= self.d):
                raise IndexError(f"region {name!r} has feature indices outside [0, {self.d})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mapping(cls, regions: dict, d: int) -> RegionAtlas:
        return cls(tuple(regions), tuple(regions.values()), d)

    @classmethod
    def read_csv(cls, path, d: int) -> RegionAtlas:
        """Atlas CSV with columns region_name, feature_index; region order = first appearance."""
        regions: dict = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                regions.setdefault(row["region_name"], []).append(int(row["feature_index"]))
        return cls.from_mapping(regions, d)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([ix.size for ix in self.indices])

    def __len__(self):
        return len(self.names)


def occlude(x, region) -> np.ndarray:
    """Copy of raw-space ``x`` with the features in ``region`` set to zero."""
    x = np.array(x, dtype=np.float64)
    region = np.asarray(region, dtype=int).ravel()
    if region.size and (region.min() < 0 or region.max() >= x.shape[-1]):
        raise IndexError(f"region indices out of range for {x.shape[-1]} features")
    x[..., region] = 0.0
    return x


@dataclass
class OcclusionResult:
    regions: tuple
    sizes: np.ndarray
    y_true: np.ndarray
    bagc_full: np.ndarray      # (N,)
    bagc_occluded: np.ndarray  # (N, R)

    @property
    def delta(self) -> np.ndarray:
        return self.bagc_occluded - self.bagc_full[:, None]

    def long_rows(self, covariates=None):
        """Rows (sample_id, region, region_size, bag_corrected, covariates...), N x (R + 1)."""
        covariates = covariates or {}
        out = []
        for i in range(self.y_true.size):
            extra = [float(np.asarray(v)[i]) for v in covariates.values()]
            out.append([i, WHOLE, 0, float(self.bagc_full[i])] + extra)
            for r, name in enumerate(self.regions):
                out.append([i, name, int(self.sizes[r]), float(self.bagc_occluded[i, r])] + extra)
        return out

    def write_long_csv(self, path, covariates=None):
        covariates = covariates or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample_id", "region", "region_size", "bag_corrected", *covariates])
            for row in self.long_rows(covariates):
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def occlusion_deltas(model, X, y, atlas: RegionAtlas, T: int = 1000, rng: RngState | None = None,
                     mode: UncertaintyMode = UncertaintyMode.FULL, threads: int = 1) -> OcclusionResult:
    """Corrected gaps with and without each region, paired per sample.

    Sample i uses the i-th split of ``rng`` for its full pass and for every
    occluded pass, so with ``threads > 1`` results do not depend on scheduling.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size}")
    if X.shape[1] != atlas.d:
        raise ValueError(f"atlas covers {atlas.d} features, data has {X.shape[1]}")
    mode = UncertaintyMode(mode)
    rng = RngState(0) if rng is None else rng
    streams = rng.split(X.shape[0])

    def one(i):
        stack = np.vstack([X[i]] + [occlude(X[i], ix) for ix in atlas.indices])
        draws = paired_draws(model, model.standardizer.transform(stack), T, mode, streams[i])
        med = np.median(draws, axis=1)
        sd = np.std(draws, axis=1)
        if np.any(sd <= 0):
            raise ValueError(f"sample {i}: degenerate predictive distribution (sigma = 0)")
        return (med - y[i]) / sd

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            bagc = np.array(list(ex.map(one, range(y.size))))
    else:
        bagc = np.array([one(i) for i in range(y.size)])
    full, occ = bagc[:, 0], bagc[:, 1:]
    return OcclusionResult(tuple(atlas.names), atlas.sizes, y, full, occ)


def _t_quantile(q: float, df: float) -> float:
    # upper q-quantile of |T|: solve P(|T| > t) = 1 - q
    return brentq(lambda t: t_sf2(t, df) - (1.0 - q), 0.0, 1e3, xtol=1e-12)


@dataclass
class ContrastFit:
    regions: tuple
    estimate: np.ndarray
    se: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    p: np.ndarray
    dof: int
    dropped: list

    def summary(self) -> dict:
        return {
            "reference": WHOLE,
            "dof": self.dof,
            "dropped_columns": self.dropped,
            "regions": [
                {"region": r, "estimate": float(e), "se": float(s), "ci_low": float(lo),
                 "ci_high": float(hi), "p": float(p)}
                for r, e, s, lo, hi, p in zip(self.regions, self.estimate, self.se,
                                              self.ci_low, self.ci_high, self.p)
            ],
        }


def region_contrast_fit(result: OcclusionResult, covariates=None, categorical=(),
                        include_region_size: bool = True, ci: float = 0.95) -> ContrastFit:
    """Fixed-effects OLS of corrected gap on region factor (whole-brain reference) + covariates.

    Covariates are per-sample arrays repeated across that sample's R + 1 rows.
    Columns collinear with earlier ones (e.g. region size, which is a function
    of the region factor, or a constant site code) are dropped with a warning.
    """
    R = len(result.regions)
    if R < 2:
        raise ValueError("need at least two regions")
    N = result.y_true.size
    covariates = dict(covariates or {})
    level = np.tile(np.arange(R + 1), N)  # 0 = whole brain
    yv = np.column_stack([result.bagc_full, result.bagc_occluded]).ravel()
    names = ["intercept"] + [f"region[{r}]" for r in result.regions]
    cols = [np.ones(yv.size)] + [(level == r + 1).astype(float) for r in range(R)]
    for cname, vals in covariates.items():
        vals = np.repeat(np.asarray(vals, dtype=np.float64).ravel(), R + 1)
        if cname in categorical:
            for lv in np.unique(vals)[1:]:
                names.append(f"{cname}[{lv:g}]")
                cols.append((vals == lv).astype(float))
        else:
            names.append(cname)
            cols.append(vals)
    if include_region_size:
        names.append("region_size")
        cols.append(np.concatenate([[0.0], result.sizes.astype(float)])[level])
    design = np.column_stack(cols)
    dep = dependent_columns(design)
    dropped = [names[j] for j in dep]
    if dep:
        warnings.warn(f"dropping collinear columns: {', '.join(dropped)}", RuntimeWarning, stacklevel=2)
        keep = [j for j in range(design.shape[1]) if j not in dep]
        design = design[:, keep]
        names = [names[j] for j in keep]
    fit = ols_fit(design, yv, names)
    idx = [names.index(f"region[{r}]") for r in result.regions]
    est = fit.coefficients[idx]
    se = fit.se[idx]
    tq = _t_quantile(ci, fit.dof)
    return ContrastFit(tuple(result.regions), est, se, est - tq * se, est + tq * se,
                       fit.p[idx], fit.dof, dropped)
