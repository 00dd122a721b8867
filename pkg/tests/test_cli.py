import csv
import json

import numpy as np
import pytest

from mccqr.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def trained(workdir):
    assert run("synth", "--family", "linear-hetero", "--n", 300, "--seed", 7, "--out-prefix", "tr") == 0
    assert run("synth", "--family", "linear-hetero", "--n", 60, "--seed", 8, "--out-prefix", "te") == 0
    assert run("train", "--data", "tr_features.csv", "--targets", "tr_targets.csv", "--epochs", 3,
               "--seed", 1, "--model-out", "m.json") == 0
    return workdir


def test_synth_is_byte_identical(workdir):
    for tag in ("a", "b"):
        assert run("synth", "--family", "linear-hetero", "--n", 100, "--seed", 7, "--out-prefix", tag) == 0
    for suffix in ("_features.csv", "_targets.csv", "_oracle.json"):
        assert (workdir / f"a{suffix}").read_bytes() == (workdir / f"b{suffix}").read_bytes()
    feats = rows(workdir / "a_features.csv")
    assert feats[0] == ["id", "x0"] and len(feats) == 101
    assert rows(workdir / "a_targets.csv")[0] == ["id", "y"]
    assert json.loads((workdir / "a_oracle.json").read_text())["seed"] == 7


def test_synth_age_like_default_width(workdir):
    assert run("synth", "--family", "age-like", "--n", 5, "--out-prefix", "age") == 0
    assert len(rows(workdir / "age_features.csv")[0]) == 201


def test_train_writes_model_and_trace(trained, capsys):
    doc = json.loads((trained / "m.json").read_text())
    assert doc["K"] == 101 and doc["d"] == 1 and len(doc["train_meta"]["loss_trace"]) == 3
    assert run("train", "--data", "tr_features.csv", "--targets", "tr_targets.csv", "--epochs", 2,
               "--model-out", "m2.json") == 0
    assert "epoch   2" in capsys.readouterr().err


def test_predict_twice_identical_and_columns(trained):
    args = ("predict", "--model", "m.json", "--data", "te_features.csv", "--draws", 200,
            "--mode", "full", "--seed", 9, "--levels", "0.5,0.9", "--truth", "te_targets.csv")
    assert run(*args, "--out", "p1.csv") == 0
    assert run(*args, "--out", "p2.csv", "--threads", 3) == 0
    assert (trained / "p1.csv").read_bytes() == (trained / "p2.csv").read_bytes()
    r = rows(trained / "p1.csv")
    assert r[0] == ["id", "y_pred_median", "sigma", "lo_0.5", "hi_0.5", "lo_0.9", "hi_0.9", "y_true"]
    assert [x[0] for x in r[1:]] == [str(i) for i in range(60)]
    lo5, hi5, lo9, hi9 = (np.array([float(x[j]) for x in r[1:]]) for j in (3, 4, 5, 6))
    assert np.all(lo9 <= lo5) and np.all(hi5 <= hi9)


def test_picp_outputs(trained, capsys):
    assert run("predict", "--model", "m.json", "--data", "te_features.csv", "--draws", 100,
               "--levels", "0.5,0.9", "--out", "p.csv") == 0
    assert run("picp", "--pred", "p.csv", "--truth", "te_targets.csv", "--out", "cal.csv",
               "--svg", "cal.svg") == 0
    assert "level" in capsys.readouterr().out
    r = rows(trained / "cal.csv")
    assert r[0] == ["level", "picp"] and [x[0] for x in r[1:]] == ["0.5", "0.9"]
    assert (trained / "cal.svg").read_text().startswith("<svg")
    # no truth available anywhere
    assert run("picp", "--pred", "p.csv") == 1
    # level not present in the predictions
    assert run("picp", "--pred", "p.csv", "--truth", "te_targets.csv", "--levels", "0.8") == 1


def test_assoc(workdir, capsys):
    g = np.random.default_rng(0)
    n = 200
    age = g.uniform(20, 70, n)
    bmi = g.normal(27, 5, n)
    with open(workdir / "gaps.csv", "w") as fh:
        fh.write("id,y_true,y_pred,sigma,bmi\n")
        for i in range(n):
            pred = age[i] + 0.3 * bmi[i] + g.normal()
            fh.write(f"{i},{float(age[i])!r},{float(pred)!r},2.0,{float(bmi[i])!r}\n")
    assert run("assoc", "--gaps", "gaps.csv", "--predictor", "bmi", "--format", "json",
               "--out", "a.json") == 0
    doc = json.loads((workdir / "a.json").read_text())
    assert doc["bag"]["p"] < 1e-6 and doc["bag"]["df1"] == 1 and doc["bag"]["df2"] == n - 3
    assert run("assoc", "--gaps", "gaps.csv", "--predictor", "weight") == 2
    assert "missing covariate" in capsys.readouterr().err


def test_occlude(trained):
    with open(trained / "atlas.csv", "w") as fh:
        fh.write("region_name,feature_index\nonly,0\n")
    # a single region cannot be contrasted
    assert run("occlude", "--model", "m.json", "--data", "te_features.csv", "--targets", "te_targets.csv",
               "--atlas", "atlas.csv", "--draws", 50, "--out", "occ.csv") == 2
    assert run("synth", "--family", "linear-hetero", "--n", 300, "--d", 3, "--seed", 1, "--out-prefix", "w") == 0
    assert run("train", "--data", "w_features.csv", "--targets", "w_targets.csv", "--epochs", 2,
               "--model-out", "w.json") == 0
    with open(trained / "atlas3.csv", "w") as fh:
        fh.write("region_name,feature_index\nsig,0\nnoise,1\nnoise,2\n")
    with open(trained / "cov.csv", "w") as fh:
        fh.write("id,site\n" + "".join(f"{i},{i % 3}\n" for i in range(300)))
    args = ("occlude", "--model", "w.json", "--data", "w_features.csv", "--targets", "w_targets.csv",
            "--atlas", "atlas3.csv", "--covariates", "cov.csv", "--draws", 50)
    assert run(*args, "--out", "o1.csv", "--summary", "s1.json") == 0
    assert run(*args, "--out", "o2.csv", "--summary", "s2.json", "--threads", 2) == 0
    assert (trained / "o1.csv").read_bytes() == (trained / "o2.csv").read_bytes()
    r = rows(trained / "o1.csv")
    assert r[0] == ["sample_id", "region", "region_size", "bag_corrected", "age", "site"]
    assert len(r) == 1 + 300 * 3
    s = json.loads((trained / "s1.json").read_text())
    assert [x["region"] for x in s["regions"]] == ["sig", "noise"]


def test_bench(workdir, capsys):
    assert run("synth", "--family", "linear-hetero", "--n", 200, "--d", 2, "--out-prefix", "b") == 0
    assert run("bench", "--data", "b_features.csv", "--targets", "b_targets.csv", "--models", "ann,lasso",
               "--folds", 3, "--draws", 20) == 0
    out = capsys.readouterr().out
    assert "ANN" in out and "LASSO" in out and "MCCQR" not in out
    assert run("bench", "--data", "b_features.csv", "--targets", "b_targets.csv", "--models", "svm") == 1


def test_exit_codes(workdir, capsys):
    assert run() == 1                                   # no subcommand
    assert run("train") == 1                            # missing required flag
    assert run("frobnicate") == 1
    assert run("--version") == 0
    (workdir / "bad.csv").write_text("id,x0,y\n0,1.0,2.0\n1,,3.0\n")
    assert run("train", "--data", "bad.csv") == 2
    err = capsys.readouterr().err
    assert "row 3" in err and "'x0'" in err
    (workdir / "txt.csv").write_text("id,x0,y\n0,abc,2.0\n")
    assert run("train", "--data", "txt.csv") == 2
    assert run("predict", "--model", "nope.json", "--data", "txt.csv") == 2


def test_numeric_failure_exit_code(workdir):
    g = np.random.default_rng(0)
    with open(workdir / "huge.csv", "w") as fh:
        fh.write("x0,y\n")
        for _ in range(128):
            fh.write(f"{float(g.normal())!r},{float(g.normal()) * 1e306!r}\n")
    with np.errstate(all="ignore"):
        assert run("train", "--data", "huge.csv", "--lr", 1e300, "--epochs", 2) == 3
