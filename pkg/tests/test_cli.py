"""Command-line round trips on temporary files, all in process."""

import csv
import json
import os

import numpy as np
import pytest

from robustpath import (
    CdConfig,
    ConvergenceError,
    FitConfig,
    InputError,
    dataset_from_features,
    fit,
    lambda_max,
    loss_spec,
    penalty_spec,
)
from robustpath.data import CLASSIFICATION, REGRESSION
from robustpath.cli import main, read_table
from robustpath.mm import FitResult


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _reg_csv(path, n=30, p=3, seed=1):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n, p))
    y = 0.4 + 1.2 * F[:, 0] - 0.8 * F[:, 1] + 0.2 * rng.normal(size=n)
    header = ["x%d" % (j + 1) for j in range(p)] + ["y"]
    _write_csv(path, header, [[repr(v) for v in row] + [repr(yy)]
                              for row, yy in zip(F.tolist(), y.tolist())])
    return F, y


def _cls_csv(path, n=30, p=3, seed=2, zero_one=False):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n, p))
    y = np.where(F[:, 0] - 0.5 * F[:, 1] + 0.3 * rng.normal(size=n) >= 0, 1.0, -1.0)
    lab = (y + 1.0) / 2.0 if zero_one else y
    header = ["x%d" % (j + 1) for j in range(p)] + ["y"]
    _write_csv(path, header, [[repr(v) for v in row] + [repr(ll)]
                              for row, ll in zip(F.tolist(), lab.tolist())])
    return F, y


def test_fit_round_trip_matches_library(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    F, y = _reg_csv(data_csv)
    out = str(tmp_path / "run")
    rc = main(["fit", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--lambda", "0.1", "--out", out])
    assert rc == 0
    doc = json.load(open(os.path.join(out, "fit.json")))
    assert doc["schema"] == 1 and doc["command"] == "fit"
    assert doc["converged"] is True
    assert doc["kkt"]["max_residual"] <= 1e-4
    assert list(doc["coefficients"]) == ["intercept", "x1", "x2", "x3"]

    ref = fit(dataset_from_features(F, y, REGRESSION), loss_spec("ls"),
              penalty_spec("lasso"), 0.1)
    assert np.max(np.abs(np.asarray(doc["phi"]) - ref.phi)) <= 1e-12

    with open(os.path.join(out, "coefs.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["name", "coefficient"]
    assert [r[0] for r in rows[1:]] == ["intercept", "x1", "x2", "x3"]
    assert np.allclose([float(r[1]) for r in rows[1:]], doc["phi"], rtol=0, atol=0)


def test_missing_response_column_exits_2(tmp_path, capsys):
    data_csv = str(tmp_path / "noresp.csv")
    _write_csv(data_csv, ["x1", "x2"], [["0.1", "0.2"], ["0.3", "0.4"]])
    rc = main(["fit", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--lambda", "0.1", "--out", str(tmp_path)])
    assert rc == 2
    assert "no column 'y'" in capsys.readouterr().err


def test_fit_above_lambda_max_keeps_slopes_zero(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    F, y = _reg_csv(data_csv, seed=7)
    lmax = lambda_max(dataset_from_features(F, y, REGRESSION), loss_spec("ls"),
                      1.0, fit_intercept=True, standardize=True)
    out = str(tmp_path / "run")
    rc = main(["fit", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--lambda", repr(1.01 * lmax), "--out", out])
    assert rc == 0
    doc = json.load(open(os.path.join(out, "fit.json")))
    assert all(b == 0.0 for b in doc["phi"][1:])
    assert doc["kkt"]["active_set"] == []


def test_predict_round_trip(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    _reg_csv(data_csv, seed=3)
    out = str(tmp_path / "run")
    assert main(["fit", "--data", data_csv, "--loss", "huber", "--penalty", "mcp",
                 "--lambda", "0.05", "--out", out]) == 0
    model = os.path.join(out, "fit.json")
    pout = str(tmp_path / "pred")
    assert main(["predict", "--model", model, "--data", data_csv, "--out", pout]) == 0
    pdoc = json.load(open(os.path.join(pout, "predict.json")))
    fdoc = json.load(open(model))
    assert abs(pdoc["loss_value"] - fdoc["loss_value"]) <= 1e-10
    with open(os.path.join(pout, "predictions.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["prediction"]
    assert len(rows) == 31
    phi = np.asarray(fdoc["phi"])
    header, M = read_table(data_csv)
    want = phi[0] + M[:, :3] @ phi[1:]
    got = np.array([float(r[0]) for r in rows[1:]])
    assert np.max(np.abs(got - want)) <= 1e-12


def test_predict_without_response_labels_only(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    _cls_csv(data_csv, seed=4)
    out = str(tmp_path / "run")
    assert main(["fit", "--data", data_csv, "--loss", "logistic", "--penalty",
                 "lasso", "--lambda", "0.02", "--out", out]) == 0
    feat_csv = str(tmp_path / "features.csv")
    header, M = read_table(data_csv)
    _write_csv(feat_csv, ["x1", "x2", "x3"],
               [[repr(v) for v in row[:3]] for row in M.tolist()])
    pout = str(tmp_path / "pred")
    assert main(["predict", "--model", os.path.join(out, "fit.json"),
                 "--data", feat_csv, "--out", pout]) == 0
    pdoc = json.load(open(os.path.join(pout, "predict.json")))
    assert pdoc["loss_value"] is None
    with open(os.path.join(pout, "predictions.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["prediction", "label"]
    assert set(float(r[1]) for r in rows[1:]) <= {1.0, -1.0}


def test_kkt_subcommand_matches_fit_report(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    _reg_csv(data_csv, seed=5)
    out = str(tmp_path / "run")
    assert main(["fit", "--data", data_csv, "--loss", "huber", "--penalty",
                 "lasso", "--lambda", "0.03", "--out", out]) == 0
    kout = str(tmp_path / "kkt")
    assert main(["kkt", "--model", os.path.join(out, "fit.json"),
                 "--data", data_csv, "--out", kout]) == 0
    kdoc = json.load(open(os.path.join(kout, "kkt.json")))
    fdoc = json.load(open(os.path.join(out, "fit.json")))
    assert abs(kdoc["max_residual"] - fdoc["kkt"]["max_residual"]) <= 1e-10
    assert kdoc["max_residual"] <= 1e-4
    names = [r["name"] for r in kdoc["residuals"]]
    assert names == ["intercept", "x1", "x2", "x3"]
    assert set(kdoc["active_set"]) <= {"x1", "x2", "x3"}


def test_path_grid_shape_and_order(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    _reg_csv(data_csv, seed=6)
    out = str(tmp_path / "run")
    rc = main(["path", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--nlambda", "12", "--out", out])
    assert rc == 0
    with open(os.path.join(out, "path.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lambda", "intercept", "x1", "x2", "x3"]
    lams = [float(r[0]) for r in rows[1:]]
    assert len(lams) == 12
    assert all(a > b for a, b in zip(lams, lams[1:]))
    assert all(float(v) == 0.0 for v in rows[1][2:])
    pdoc = json.load(open(os.path.join(out, "path.json")))
    assert all(r["converged"] for r in pdoc["per_lambda"])
    assert pdoc["lambdas"] == lams


def test_cv_writes_fold_partition(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    _reg_csv(data_csv, n=40, seed=8)
    out = str(tmp_path / "run")
    rc = main(["cv", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--nlambda", "6", "--nfolds", "4", "--out", out])
    assert rc == 0
    cdoc = json.load(open(os.path.join(out, "cv.json")))
    lams = [row["lambda"] for row in cdoc["table"]]
    assert cdoc["best_lambda"] in lams
    assert len(lams) == 6
    with open(os.path.join(out, "folds.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["row", "fold"]
    folds = [int(r[1]) for r in rows[1:]]
    assert len(folds) == 40
    counts = np.bincount(folds, minlength=4)
    assert counts.max() - counts.min() <= 1


def test_cv_with_tuning_file_skips_folds(tmp_path):
    train_csv = str(tmp_path / "train.csv")
    tune_csv = str(tmp_path / "tune.csv")
    _reg_csv(train_csv, seed=9)
    _reg_csv(tune_csv, seed=10)
    out = str(tmp_path / "run")
    rc = main(["cv", "--data", train_csv, "--loss", "ls", "--penalty", "lasso",
               "--nlambda", "5", "--tuning-file", tune_csv, "--out", out])
    assert rc == 0
    assert not os.path.exists(os.path.join(out, "folds.csv"))
    cdoc = json.load(open(os.path.join(out, "cv.json")))
    assert all(row["n_folds"] == 1 for row in cdoc["table"])
    assert cdoc["config"]["folds"] == "tuning-file"


def test_simulate_is_deterministic(tmp_path):
    args = ["simulate", "--example", "1", "--v", "0", "--reps", "1",
            "--n-train", "60", "--n-tune", "40", "--n-test", "20",
            "--nlambda", "8", "--methods", "LSLASSO", "--write-data", "all"]
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(args + ["--out", out]) == 0
        outs.append(out)
    for rel in ("error_table.csv", "nvar_table.csv", "simulate.json",
                os.path.join("data", "v00", "rep000", "train.csv")):
        a = open(os.path.join(outs[0], rel), "rb").read()
        b = open(os.path.join(outs[1], rel), "rb").read()
        assert a == b, rel
    sdoc = json.load(open(os.path.join(outs[0], "simulate.json")))
    assert sdoc["probe"]["failed"] == 0
    assert sdoc["convergence"]["fits"] > 0
    assert sdoc["convergence"]["converged"] == sdoc["convergence"]["fits"]


def test_simulate_list_methods(tmp_path, capsys):
    assert main(["simulate", "--example", "2", "--list-methods"]) == 0
    lines = capsys.readouterr().out.split()
    assert "GlossSCAD" in lines and "QlossSCAD" in lines and "LogisLASSO" in lines
    assert lines == sorted(lines)


def test_unknown_method_exits_2(tmp_path, capsys):
    rc = main(["simulate", "--example", "1", "--methods", "NoSuchMethod",
               "--out", str(tmp_path)])
    assert rc == 2


def test_missing_file_exits_2(tmp_path, capsys):
    rc = main(["fit", "--data", str(tmp_path / "absent.csv"), "--loss", "ls",
               "--penalty", "lasso", "--lambda", "0.1", "--out", str(tmp_path)])
    assert rc == 2
    assert "cannot open" in capsys.readouterr().err


def test_illegal_penalty_configuration_exits_2(tmp_path, capsys):
    data_csv = str(tmp_path / "train.csv")
    _cls_csv(data_csv, seed=11)
    rc = main(["fit", "--data", data_csv, "--loss", "gloss", "--penalty", "mcp",
               "--a", "2", "--lambda", "0.05", "--no-standardize",
               "--out", str(tmp_path)])
    assert rc == 2


def test_convergence_failure_exits_3_with_truncated_output(tmp_path, monkeypatch):
    data_csv = str(tmp_path / "train.csv")
    _reg_csv(data_csv, seed=12)
    out = str(tmp_path / "run")

    def exhausted(data, loss, pen, lam, cfg=None, cd=None):
        res = FitResult(np.zeros(4), [1.0, 0.9], 500, False, 0.5, lam, None, True)
        raise ConvergenceError("outer budget exhausted", result=res)

    monkeypatch.setattr("robustpath.cli.fit", exhausted)
    rc = main(["fit", "--data", data_csv, "--loss", "ls", "--penalty", "lasso",
               "--lambda", "0.1", "--out", out])
    assert rc == 3
    doc = json.load(open(os.path.join(out, "fit.json")))
    assert doc["converged"] is False
    assert doc["n_outer"] == 500


def test_parser_exit_codes():
    assert main(["--version"]) == 0
    assert main(["fit"]) == 2
    assert main([]) == 2


def test_zero_one_labels_accepted(tmp_path):
    data_csv = str(tmp_path / "train.csv")
    F, y = _cls_csv(data_csv, seed=13, zero_one=True)
    out = str(tmp_path / "run")
    rc = main(["fit", "--data", data_csv, "--loss", "logistic", "--penalty",
               "lasso", "--lambda", "0.05", "--out", out])
    assert rc == 0
    ref = fit(dataset_from_features(F, y, CLASSIFICATION), loss_spec("logistic"),
              penalty_spec("lasso"), 0.05)
    doc = json.load(open(os.path.join(out, "fit.json")))
    assert np.max(np.abs(np.asarray(doc["phi"]) - ref.phi)) <= 1e-12


def test_read_table_rejects_malformed_files(tmp_path):
    dup = str(tmp_path / "dup.csv")
    _write_csv(dup, ["a", "a"], [["1", "2"]])
    with pytest.raises(InputError, match="duplicate"):
        read_table(dup)

    text = str(tmp_path / "text.csv")
    _write_csv(text, ["a", "b"], [["1", "2"], ["1", "oops"]])
    with pytest.raises(InputError, match="line 3 column 'b'"):
        read_table(text)

    na = str(tmp_path / "na.csv")
    _write_csv(na, ["a"], [["NA"]])
    with pytest.raises(InputError, match="missing values"):
        read_table(na)

    ragged = str(tmp_path / "ragged.csv")
    with open(ragged, "w") as fh:
        fh.write("a,b\n1,2\n3\n")
    with pytest.raises(InputError, match="line 3 has 1 fields"):
        read_table(ragged)

    inf = str(tmp_path / "inf.csv")
    _write_csv(inf, ["a"], [["inf"]])
    with pytest.raises(InputError, match="non-finite"):
        read_table(inf)

    empty = str(tmp_path / "empty.csv")
    open(empty, "w").close()
    with pytest.raises(InputError, match="empty"):
        read_table(empty)

    headonly = str(tmp_path / "headonly.csv")
    _write_csv(headonly, ["a"], [])
    with pytest.raises(InputError, match="no data rows"):
        read_table(headonly)
