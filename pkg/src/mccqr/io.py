"""CSV datasets and model files."""

from __future__ import annotations

import csv
import json

import numpy as np

from .baselines import LassoModel
from .model import MccqrModel


class DataError(ValueError):
    """Malformed input file; the message names the offending row and column."""


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path_or_fh, header, rows):
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_fh, "write"):
        _write(path_or_fh)
    else:
        with open(path_or_fh, "w", newline="") as fh:
            _write(fh)


def read_table(path, keep_text=("id",)):
    """Read a rectangular CSV with a header.

    Returns:
        (header, numeric dict name -> float array, text dict name -> list of str)
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    numeric = {h: np.empty(len(rows)) for h in header if h not in keep_text}
    text = {h: [] for h in header if h in keep_text}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} fields, header has {len(header)}")
        for h, v in zip(header, row):
            v = v.strip()
            if h in text:
                text[h].append(v)
                continue
            if v == "" or v.lower() in ("na", "nan"):
                raise DataError(f"{path}: missing value at row {i}, column {h!r}")
            try:
                x = float(v)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {v!r} at row {i}, column {h!r}") from None
            if not np.isfinite(x):
                raise DataError(f"{path}: non-finite value at row {i}, column {h!r}")
            numeric[h][i - 2] = x
    return header, numeric, text


def load_dataset(path, target: str | None = "y", targets_path=None, id_column: str = "id",
                 require_target: bool = True, exclude=()):
    """Features, optional target and row ids from CSV.

    The target is taken from ``targets_path`` if given, otherwise from the
    ``target`` column of the data file. Every other numeric column (minus
    ``exclude``) is a feature.

    Returns:
        (ids, X, y or None, feature_names)
    """
    header, num, text = read_table(path, keep_text=(id_column,))
    n = len(next(iter(num.values()))) if num else len(text.get(id_column, []))
    ids = text.get(id_column) or [str(i) for i in range(n)]
    y = None
    if targets_path is not None:
        _, tnum, ttext = read_table(targets_path, keep_text=(id_column,))
        if target not in tnum:
            raise DataError(f"{targets_path}: no target column {target!r}")
        y = tnum[target]
        if y.size != n:
            raise DataError(f"{targets_path}: {y.size} targets for {n} data rows")
        if id_column in ttext and id_column in text and ttext[id_column] != text[id_column]:
            raise DataError(f"{targets_path}: ids do not match {path} row for row")
    elif target is not None and target in num:
        y = num[target]
    if y is None and require_target:
        raise DataError(f"{path}: no target column {target!r} (use --targets to supply one)")
    names = [h for h in header if h in num and h != target and h not in exclude]
    if targets_path is not None:
        names = [h for h in header if h in num and h not in exclude]
    if not names:
        raise DataError(f"{path}: no feature columns")
    X = np.column_stack([num[h] for h in names])
    return ids, X, y, names


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(json.dumps(model.to_dict()))
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    kind = doc.get("model_type", "mccqr")
    if kind in ("mccqr", "ann"):
        return MccqrModel.from_dict(doc)
    if kind == "lasso":
        return LassoModel.from_dict(doc)
    raise DataError(f"{path}: unknown model_type {kind!r}")
