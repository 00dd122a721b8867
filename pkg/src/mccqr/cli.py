"""Command-line entry point: synth, train, predict, picp, assoc, occlude, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__
from .baselines import LassoModel, ann_train, lasso_fit
from .bench import MODELS, bench_table, cross_validate
from .calibration import CalibrationReport, coverage, intervals, median_abs_error
from .gaps import association_json, association_table, association_test, gaps_from_arrays
from .io import DataError, load_dataset, load_model, read_table, save_model, write_csv
from .model import NumericalError, TrainConfig, train
from .numerics import RngState
from .occlusion import RegionAtlas, occlusion_deltas, region_contrast_fit
from .predict import UncertaintyMode, predict_batch
from .synthetic import FAMILIES, SyntheticSpec, generate, oracle_spec_json


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _level_key(lv: float) -> str:
    return f"{lv:g}"


# -- subcommands --------------------------------------------------------------

def cmd_synth(args):
    d = args.d if args.d is not None else (200 if args.family == "age-like" else 1)
    spec = SyntheticSpec(args.family, args.n, d, args.seed)
    X, y, _, _ = generate(spec)
    ids = [str(i) for i in range(spec.n)]
    write_csv(f"{args.out_prefix}_features.csv", ["id"] + [f"x{j}" for j in range(d)],
              ([i] + list(row) for i, row in zip(ids, X)))
    write_csv(f"{args.out_prefix}_targets.csv", ["id", "y"], zip(ids, y))
    with open(f"{args.out_prefix}_oracle.json", "w") as fh:
        fh.write(oracle_spec_json(spec) + "\n")


def cmd_train(args):
    _, X, y, _ = load_dataset(args.data, args.target, args.targets)
    config = TrainConfig(epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch,
                         dropout_rate=args.dropout, K=args.quantiles, hidden=args.hidden, seed=args.seed)
    if args.model_type == "lasso":
        model = lasso_fit(X, y, args.lam)
        print(f"lasso: {model.n_iter} sweeps, objective {model.objective_trace[-1]:.6g}", file=sys.stderr)
    else:
        fit = train if args.model_type == "mccqr" else ann_train
        model = fit(X, y, config)
        for e, loss in enumerate(model.loss_trace, 1):
            print(f"epoch {e:3d}  loss {loss:.6f}", file=sys.stderr)
    save_model(model, args.model_out)


def _predict_rows(model, X, args):
    levels = args.levels or []
    if isinstance(model, LassoModel) or model.model_type == "ann":
        pred = model.predict(X) if isinstance(model, LassoModel) else model.heads(X)[:, 0]
        if levels:
            raise UsageError("interval levels need an MCCQR model")
        return pred, np.zeros_like(pred), {}
    dists = predict_batch(model, X, args.draws, UncertaintyMode(args.mode), RngState(args.seed),
                          threads=args.threads)
    med = np.array([d.median for d in dists])
    sd = np.array([d.std for d in dists])
    bounds = {lv: intervals(dists, lv) for lv in levels}
    return med, sd, bounds


def cmd_predict(args):
    model = load_model(args.model)
    ids, X, y, _ = load_dataset(args.data, args.target, args.truth, require_target=False)
    n_in = model.standardizer.n_features_in
    if X.shape[1] != n_in:
        raise DataError(f"{args.data}: {X.shape[1]} feature columns, model expects {n_in}")
    med, sd, bounds = _predict_rows(model, X, args)
    header = ["id", "y_pred_median", "sigma"]
    for lv in bounds:
        header += [f"lo_{_level_key(lv)}", f"hi_{_level_key(lv)}"]
    if y is not None:
        header.append("y_true")
    rows = []
    for i in range(len(ids)):
        row = [ids[i], med[i], sd[i]]
        for b in bounds.values():
            row += [b[i, 0], b[i, 1]]
        if y is not None:
            row.append(y[i])
        rows.append(row)
    write_csv(args.out if args.out else sys.stdout, header, rows)


def cmd_picp(args):
    header, num, _ = read_table(args.pred)
    if args.truth:
        _, tnum, _ = read_table(args.truth)
        if args.target not in tnum:
            raise DataError(f"{args.truth}: no column {args.target!r}")
        y = tnum[args.target]
    elif "y_true" in num:
        y = num["y_true"]
    else:
        raise UsageError("no truth: pass --truth or predict with --truth")
    present = sorted(float(h[3:]) for h in header if h.startswith("lo_"))
    levels = args.levels or present
    if not levels:
        raise UsageError(f"{args.pred} has no interval columns; rerun predict with --levels")
    cov = []
    for lv in levels:
        lo, hi = f"lo_{_level_key(lv)}", f"hi_{_level_key(lv)}"
        if lo not in num or hi not in num:
            raise UsageError(f"{args.pred} has no interval columns for level {lv:g}")
        if num[lo].size != y.size:
            raise DataError(f"{args.pred}: {num[lo].size} rows but {y.size} targets")
        cov.append(coverage(y, np.column_stack([num[lo], num[hi]])))
    report = CalibrationReport(np.array(levels), np.array(cov), int(y.size),
                               mae_median=median_abs_error(y, num["y_pred_median"]))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
    print(report.to_table())
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(report.to_svg() + "\n")


def cmd_assoc(args):
    _, num, _ = read_table(args.gaps)
    ypred = num.get("y_pred", num.get("y_pred_median"))
    if ypred is None or "y_true" not in num or "sigma" not in num:
        raise DataError(f"{args.gaps}: need columns y_true, y_pred (or y_pred_median), sigma")
    names = [args.predictor] + args.covariates
    missing = [c for c in names if c not in num]
    if missing:
        raise DataError(f"{args.gaps}: missing covariate column(s) {', '.join(missing)}")
    cov_cols = {c: num[c] for c in names}
    if "age" not in cov_cols and not args.no_age:
        cov_cols["age"] = num.get("age", num["y_true"])
    records = gaps_from_arrays(num["y_true"], ypred, num["sigma"], cov_cols)
    responses = {"bag": ("bag",), "bagc": ("bag_corrected",),
                 "both": ("bag", "bag_corrected")}[args.response]
    res = association_test(records, args.predictor, args.covariates, responses, args.categorical)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(association_json(res) + "\n")
    print(association_json(res) if args.format == "json" else association_table(res))


def cmd_occlude(args):
    model = load_model(args.model)
    if isinstance(model, LassoModel) or model.model_type != "mccqr":
        raise UsageError("occlude needs an MCCQR model")
    _, X, y, _ = load_dataset(args.data, args.target, args.targets)
    atlas = RegionAtlas.read_csv(args.atlas, X.shape[1])
    res = occlusion_deltas(model, X, y, atlas, args.draws, RngState(args.seed), threads=args.threads)
    covs = {"age": y}
    if args.covariates:
        _, cnum, _ = read_table(args.covariates)
        for k, v in cnum.items():
            if v.size != y.size:
                raise DataError(f"{args.covariates}: {v.size} rows, expected {y.size}")
            covs[k] = v
    res.write_long_csv(args.out, covs)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = region_contrast_fit(res, covs, categorical=args.categorical)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = json.dumps(fit.summary(), indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_bench(args):
    exclude = [args.group_column] if args.group_column else []
    _, X, y, names = load_dataset(args.data, args.target, args.targets, exclude=exclude)
    groups = None
    if args.group_column:
        _, num, _ = read_table(args.data)
        if args.group_column not in num:
            raise DataError(f"{args.data}: no group column {args.group_column!r}")
        groups = num[args.group_column]
    unknown = [m for m in args.models if m not in MODELS]
    if unknown:
        raise UsageError(f"unknown model(s): {', '.join(unknown)}")
    config = TrainConfig(seed=args.seed)
    res = cross_validate(X, y, args.models, args.folds, args.seed, groups, config, args.draws)
    print(bench_table(res))


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mccqr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mccqr {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic dataset with known quantiles")
    s.add_argument("--family", choices=FAMILIES, default="linear-hetero")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--d", type=int, default=None, help="feature count (default 1, or 200 for age-like)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-prefix", default="synth")
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("train", help="fit a model and write model JSON")
    t.add_argument("--data", required=True)
    t.add_argument("--targets", help="separate targets CSV (id, y)")
    t.add_argument("--target", default="y")
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--batch", type=int, default=64)
    t.add_argument("--dropout", type=float, default=0.2)
    t.add_argument("--quantiles", type=int, default=101)
    t.add_argument("--hidden", type=int, default=32)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--model-type", choices=MODELS, default="mccqr")
    t.add_argument("--lam", type=float, default=1.0, help="LASSO penalty")
    t.add_argument("--model-out", default="model.json")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("predict", help="Monte-Carlo predictions to CSV")
    r.add_argument("--model", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--target", default="y", help="column excluded from features if present")
    r.add_argument("--truth", help="targets CSV; adds a y_true column")
    r.add_argument("--draws", type=int, default=1000)
    r.add_argument("--mode", choices=[m.value for m in UncertaintyMode], default="full")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--levels", type=_floats, default=None)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out")
    r.set_defaults(func=cmd_predict)

    c = sub.add_parser("picp", help="calibration report from predict output")
    c.add_argument("--pred", required=True)
    c.add_argument("--truth")
    c.add_argument("--target", default="y")
    c.add_argument("--levels", type=_floats, default=None)
    c.add_argument("--out", help="CSV (level, picp)")
    c.add_argument("--svg")
    c.set_defaults(func=cmd_picp)

    a = sub.add_parser("assoc", help="partial F test on raw and corrected gaps")
    a.add_argument("--gaps", required=True)
    a.add_argument("--predictor", required=True)
    a.add_argument("--covariates", type=_names, default=[])
    a.add_argument("--categorical", type=_names, default=[])
    a.add_argument("--response", choices=["bag", "bagc", "both"], default="both")
    a.add_argument("--no-age", action="store_true", help="do not add y_true as an age covariate")
    a.add_argument("--format", choices=["table", "json"], default="table")
    a.add_argument("--out", help="write JSON summary here")
    a.set_defaults(func=cmd_assoc)

    o = sub.add_parser("occlude", help="occlusion-sensitivity mapping")
    o.add_argument("--model", required=True)
    o.add_argument("--data", required=True)
    o.add_argument("--targets")
    o.add_argument("--target", default="y")
    o.add_argument("--atlas", required=True)
    o.add_argument("--covariates", help="per-sample covariates CSV (e.g. gender, site)")
    o.add_argument("--categorical", type=_names, default=["site"])
    o.add_argument("--draws", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--threads", type=int, default=1)
    o.add_argument("--out", required=True)
    o.add_argument("--summary")
    o.set_defaults(func=cmd_occlude)

    b = sub.add_parser("bench", help="k-fold median absolute error per model")
    b.add_argument("--data", required=True)
    b.add_argument("--targets")
    b.add_argument("--target", default="y")
    b.add_argument("--models", type=_names, default=list(MODELS))
    b.add_argument("--folds", type=int, default=10)
    b.add_argument("--group-column", help="leave-one-group-out instead of k-fold")
    b.add_argument("--draws", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args)
    except UsageError as e:
        print(f"mccqr {args.command}: {e}", file=sys.stderr)
        return 1
    except NumericalError as e:
        print(f"mccqr {args.command}: numerical failure: {e}", file=sys.stderr)
        return 3
    except (DataError, ValueError, KeyError, IndexError, OSError) as e:
        print(f"mccqr {args.command}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
