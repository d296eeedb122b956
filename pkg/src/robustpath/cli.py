"""Command line interface.

Subcommands: fit, path, cv, predict, kkt, simulate.  Inputs are headered CSV
with one response column; every field must parse as a finite float and
missing-value tokens are rejected.  Outputs are CSV plus JSON documents that
embed the resolved configuration, the package version, and a schema number.

Exit codes: 0 success; 2 malformed input or configuration; 3 convergence
failure (partial outputs are still written where possible).  The default
output directory is the current one, overridable via ROBUSTPATH_OUTDIR.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .bench import (
    METHODS,
    convergence_rate,
    format_table,
    probe_failures,
    resolve_methods,
    run_benchmark,
)
from .cd import CdConfig, _standardize_columns
from .data import CLASSIFICATION, REGRESSION, Dataset, dataset_from_features, map_binary_labels
from .datagen import SimSpec, generate, replicate_seed
from .diagnostics import dini_stationarity_probe, kkt_residual
from .errors import ConfigurationError, ConvergenceError, InputError
from .losses import FAMILIES, REGRESSION_FAMILIES, empirical_loss, loss_spec
from .mm import FitConfig, fit, internal_problem
from .paths import METRICS, PathConfig, cross_validate, evaluate_metric, solution_path
from .penalties import PENALTIES, penalty_spec

log = logging.getLogger("robustpath")

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE = 0, 2, 3
OUT_ENV = "ROBUSTPATH_OUTDIR"
SCHEMA = 1
_NA_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


def read_table(path):
    """Strict CSV read: header row plus all-numeric finite fields."""
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise InputError("cannot open %s: %s" % (path, e.strerror))
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("%s is empty; a header row is required" % path)
        if len(set(header)) != len(header):
            raise InputError("%s has duplicate column names" % path)
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise InputError("%s line %d has %d fields, expected %d"
                                 % (path, i, len(row), len(header)))
            vals = []
            for name, tok in zip(header, row):
                if tok.strip().lower() in _NA_TOKENS:
                    raise InputError("%s line %d column %r: missing values are not supported"
                                     % (path, i, name))
                try:
                    x = float(tok)
                except ValueError:
                    raise InputError("%s line %d column %r: %r is not numeric"
                                     % (path, i, name, tok))
                if not np.isfinite(x):
                    raise InputError("%s line %d column %r: non-finite value %r"
                                     % (path, i, name, tok))
                vals.append(x)
            rows.append(vals)
    if not rows:
        raise InputError("%s has a header but no data rows" % path)
    return header, np.asarray(rows, dtype=np.float64)


def load_dataset(path, response, task, feature_names=None):
    """Build a Dataset from a CSV file.

    With feature_names, columns are selected by name (order preserved) and the
    response is optional; otherwise the response is required and every other
    column is a feature in file order.
    """
    header, M = read_table(path)
    cols = {name: k for k, name in enumerate(header)}
    if feature_names is not None:
        missing = [nm for nm in feature_names if nm not in cols]
        if missing:
            raise InputError("%s is missing feature columns: %s" % (path, ", ".join(missing)))
        F = M[:, [cols[nm] for nm in feature_names]]
        names = list(feature_names)
        y = M[:, cols[response]] if response in cols else None
    else:
        if response not in cols:
            raise InputError("%s has no column %r (columns: %s)"
                             % (path, response, ", ".join(header)))
        names = [nm for nm in header if nm != response]
        F = M[:, [cols[nm] for nm in names]]
        y = M[:, cols[response]]
    if y is None:
        y = np.zeros(F.shape[0]) if task == REGRESSION else np.ones(F.shape[0])
        return dataset_from_features(F, y, task, names), False
    if task == CLASSIFICATION:
        y, mapped = map_binary_labels(y)
        if mapped:
            log.info("mapped {0,1} labels in %s to {-1,+1}", path)
    return dataset_from_features(F, y, task, names), True


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _jsonable(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError("cannot serialize %r" % type(o).__name__)


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _document(command, config, body):
    doc = {"schema": SCHEMA, "version": __version__, "command": command, "config": config}
    doc.update(body)
    return doc


def _outdir(args):
    d = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _task_of(loss_name):
    return REGRESSION if loss_name in REGRESSION_FAMILIES else CLASSIFICATION


def _model_pieces(args):
    loss = loss_spec(args.loss, args.sigma)
    pen = penalty_spec(args.penalty, args.a, args.alpha) if args.penalty else None
    return loss, pen


def _fit_document(args, data, loss, pen, lam, res, data_path):
    view, phi_int = internal_problem(data, res)
    rep = kkt_residual(view, loss, pen, lam, phi_int, res.fit_intercept)
    names = data.feature_names or ["x%d" % (j + 1) for j in range(data.p)]
    config = {
        "data": data_path,
        "response": args.response,
        "n": data.n,
        "p": data.p,
        "loss": {"family": loss.family, "sigma": loss.sigma},
        "penalty": {"family": pen.family, "a": pen.a, "alpha": pen.alpha},
        "lambda": lam,
        "fit_intercept": res.fit_intercept,
        "standardize": res.scaling is not None,
    }
    body = {
        "feature_names": names,
        "phi": [float(x) for x in res.phi],
        "coefficients": dict(
            [("intercept", float(res.phi[0]))]
            + [(nm, float(b)) for nm, b in zip(names, res.phi[1:])]
        ),
        "converged": bool(res.converged),
        "n_outer": int(res.n_outer),
        "objective": float(res.objective_trace[-1]),
        "objective_trace": [float(x) for x in res.objective_trace],
        "loss_value": float(empirical_loss(loss, data, res.phi)),
        "kkt": {
            "max_residual": rep.max_residual,
            "residuals": [float(r) for r in rep.residuals],
            "rules": rep.rules,
            "active_set": [int(j) for j in rep.active_set],
        },
    }
    return _document("fit", config, body)


def cmd_fit(args):
    loss, pen = _model_pieces(args)
    if pen is None:
        raise InputError("fit requires --penalty (lasso, scad, or mcp)")
    if args.lam is None:
        raise InputError("fit requires --lambda")
    data, _ = load_dataset(args.data, args.response, loss.task)
    cfg = FitConfig(fit_intercept=not args.no_intercept)
    cd = CdConfig(standardize=args.standardize)
    out = _outdir(args)
    code = EXIT_OK
    try:
        res = fit(data, loss, pen, args.lam, cfg, cd)
    except ConvergenceError as e:
        res = e.result
        code = EXIT_CONVERGENCE
        log.error("fit did not converge; writing the truncated iterate")
    doc = _fit_document(args, data, loss, pen, args.lam, res, args.data)
    write_json(os.path.join(out, "fit.json"), doc)
    names = ["intercept"] + doc["feature_names"]
    write_csv(
        os.path.join(out, "coefs.csv"),
        ["name", "coefficient"],
        [(nm, repr(float(b))) for nm, b in zip(names, res.phi)],
    )
    return code


def _load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InputError("cannot open %s: %s" % (path, e.strerror))
    except json.JSONDecodeError as e:
        raise InputError("%s is not valid JSON: %s" % (path, e))
    if doc.get("schema") != SCHEMA or "phi" not in doc or "config" not in doc:
        raise InputError("%s is not a fit document" % path)
    return doc


def cmd_predict(args):
    doc = _load_model(args.model)
    cfgm = doc["config"]
    loss = loss_spec(cfgm["loss"]["family"], cfgm["loss"]["sigma"])
    phi = np.asarray(doc["phi"], dtype=np.float64)
    data, has_y = load_dataset(args.data, args.response or cfgm["response"],
                               loss.task, doc["feature_names"])
    f = data.X @ phi
    out = _outdir(args)
    if loss.task == CLASSIFICATION:
        lab = np.where(f >= 0.0, 1.0, -1.0)
        rows = [(repr(float(a)), repr(float(b))) for a, b in zip(f, lab)]
        write_csv(os.path.join(out, "predictions.csv"), ["prediction", "label"], rows)
    else:
        write_csv(os.path.join(out, "predictions.csv"), ["prediction"],
                  [(repr(float(a)),) for a in f])
    body = {"n": data.n, "loss_value": float(empirical_loss(loss, data, phi)) if has_y else None}
    config = {"model": args.model, "data": args.data,
              "loss": cfgm["loss"], "response": args.response or cfgm["response"]}
    write_json(os.path.join(out, "predict.json"), _document("predict", config, body))
    return EXIT_OK


def cmd_kkt(args):
    doc = _load_model(args.model)
    cfgm = doc["config"]
    loss = loss_spec(cfgm["loss"]["family"], cfgm["loss"]["sigma"])
    pen = penalty_spec(cfgm["penalty"]["family"], cfgm["penalty"]["a"], cfgm["penalty"]["alpha"])
    lam = float(cfgm["lambda"])
    phi = np.asarray(doc["phi"], dtype=np.float64)
    data, has_y = load_dataset(args.data, args.response or cfgm["response"],
                               loss.task, doc["feature_names"])
    if not has_y:
        raise InputError("kkt needs the response column %r" % (args.response or cfgm["response"]))
    if cfgm["standardize"]:
        Xs, mu, sd = _standardize_columns(data.X, center=cfgm["fit_intercept"])
        view = Dataset(Xs, data.y, data.task, data.feature_names)
        phi_v = phi.copy()
        phi_v[1:] = phi[1:] * sd
        if cfgm["fit_intercept"]:
            phi_v[0] = phi[0] + float(np.dot(phi[1:], mu))
    else:
        view, phi_v = data, phi
    rep = kkt_residual(view, loss, pen, lam, phi_v, cfgm["fit_intercept"])
    names = ["intercept"] + doc["feature_names"]
    body = {
        "max_residual": rep.max_residual,
        "residuals": [
            {"name": nm, "residual": float(r), "rule": rule}
            for nm, r, rule in zip(names, rep.residuals, rep.rules)
        ],
        "active_set": [doc["feature_names"][j - 1] for j in rep.active_set],
    }
    config = {"model": args.model, "data": args.data, "lambda": lam,
              "loss": cfgm["loss"], "penalty": cfgm["penalty"],
              "standardize": cfgm["standardize"], "fit_intercept": cfgm["fit_intercept"]}
    write_json(os.path.join(_outdir(args), "kkt.json"), _document("kkt", config, body))
    return EXIT_OK


def _convergence_exit(n_conv, n_fits):
    if n_fits == 0 or n_conv / n_fits >= 0.9:
        return EXIT_OK
    log.error("only %d of %d fits converged", n_conv, n_fits)
    return EXIT_CONVERGENCE


def cmd_path(args):
    loss, pen = _model_pieces(args)
    if pen is None:
        raise InputError("path requires --penalty (lasso, scad, or mcp)")
    data, _ = load_dataset(args.data, args.response, loss.task)
    cfg = PathConfig(args.nlambda, args.lambda_min_ratio, args.path_direction)
    fit_cfg = FitConfig(fit_intercept=not args.no_intercept)
    cd = CdConfig(standardize=args.standardize)
    res = solution_path(data, loss, pen, cfg, fit_cfg, cd)
    out = _outdir(args)
    names = data.feature_names or ["x%d" % (j + 1) for j in range(data.p)]
    rows = [
        [repr(float(lam)), repr(float(row[0]))] + [repr(float(b)) for b in row[1:]]
        for lam, row in zip(res.lambdas, res.coefs)
    ]
    write_csv(os.path.join(out, "path.csv"), ["lambda", "intercept"] + names, rows)
    config = {
        "data": args.data, "response": args.response,
        "loss": {"family": loss.family, "sigma": loss.sigma},
        "penalty": {"family": pen.family, "a": pen.a, "alpha": pen.alpha},
        "n_lambda": cfg.n_lambda, "lambda_min_ratio": cfg.eps, "direction": cfg.direction,
        "fit_intercept": not args.no_intercept, "standardize": args.standardize,
        "n": data.n, "p": data.p,
    }
    body = {"lambdas": [float(x) for x in res.lambdas], "per_lambda": res.per_lambda,
            "feature_names": names}
    write_json(os.path.join(out, "path.json"), _document("path", config, body))
    n_conv = sum(r["converged"] for r in res.per_lambda)
    return _convergence_exit(n_conv, len(res.per_lambda))


def cmd_cv(args):
    loss, pen = _model_pieces(args)
    if pen is None:
        raise InputError("cv requires --penalty (lasso, scad, or mcp)")
    data, _ = load_dataset(args.data, args.response, loss.task)
    cfg = PathConfig(args.nlambda, args.lambda_min_ratio, "forward")
    fit_cfg = FitConfig(fit_intercept=not args.no_intercept)
    cd = CdConfig(standardize=args.standardize)
    metric = args.metric
    if args.tuning_file:
        tune, has_y = load_dataset(args.tuning_file, args.response, loss.task)
        if not has_y:
            raise InputError("tuning file needs the response column %r" % args.response)
        folds = tune
    else:
        folds = args.nfolds
    best, table, detail = cross_validate(
        data, loss, pen, cfg, folds, metric, fit_cfg, cd,
        seed=args.seed, jobs=args.jobs, return_detail=True,
    )
    out = _outdir(args)
    write_csv(
        os.path.join(out, "cv.csv"),
        ["lambda", "mean", "sd", "n_folds"],
        [
            (repr(r["lambda"]),
             "NA" if r["mean"] is None else repr(r["mean"]),
             "NA" if r["sd"] is None else repr(r["sd"]),
             r["n_folds"])
            for r in table
        ],
    )
    if detail["assignments"] is not None:
        write_csv(os.path.join(out, "folds.csv"), ["row", "fold"],
                  [(i, int(f)) for i, f in enumerate(detail["assignments"])])
    config = {
        "data": args.data, "response": args.response,
        "loss": {"family": loss.family, "sigma": loss.sigma},
        "penalty": {"family": pen.family, "a": pen.a, "alpha": pen.alpha},
        "n_lambda": cfg.n_lambda, "lambda_min_ratio": cfg.eps,
        "metric": metric or ("mse" if loss.task == REGRESSION else "misclass"),
        "folds": "tuning-file" if args.tuning_file else args.nfolds,
        "tuning_file": args.tuning_file, "seed": args.seed,
        "fit_intercept": not args.no_intercept, "standardize": args.standardize,
    }
    body = {"best_lambda": best, "table": table}
    write_json(os.path.join(out, "cv.json"), _document("cv", config, body))
    n_fits = n_conv = 0
    for p in detail["paths"]:
        if p is None:
            continue
        n_fits += len(p.per_lambda)
        n_conv += sum(r["converged"] for r in p.per_lambda)
    return _convergence_exit(n_conv, n_fits)


def _write_dataset_csv(path, ds, response="y"):
    names = ds.feature_names or ["x%d" % (j + 1) for j in range(ds.p)]
    rows = [
        [repr(float(v)) for v in ds.X[i, 1:]] + [repr(float(ds.y[i]))]
        for i in range(ds.n)
    ]
    write_csv(path, names + [response], rows)


def cmd_simulate(args):
    if args.v is None:
        vs = [0, 5, 10, 20]
    else:
        try:
            vs = [int(tok) for tok in str(args.v).split(",")]
        except ValueError:
            raise InputError("--v wants comma separated integers, got %r" % args.v)
    methods = args.methods.split(",") if args.methods else None
    sizes = (args.n_train, args.n_tune, args.n_test)
    try:
        bench = run_benchmark(args.example, vs, args.reps, args.seed, methods,
                              args.nlambda, sizes, args.jobs)
    except KeyError as e:
        raise InputError(str(e.args[0]))
    out = _outdir(args)

    reps_to_write = {"none": [], "first": [0], "all": list(range(args.reps))}[args.write_data]
    for rep in reps_to_write:
        for v in vs:
            d = os.path.join(out, "data", "v%02d" % v, "rep%03d" % rep)
            os.makedirs(d, exist_ok=True)
            spec = SimSpec(args.example, args.n_train, args.n_tune, args.n_test,
                           v, replicate_seed(args.seed, rep))
            train, tune, test, truth = generate(spec)
            _write_dataset_csv(os.path.join(d, "train.csv"), train)
            _write_dataset_csv(os.path.join(d, "tune.csv"), tune)
            _write_dataset_csv(os.path.join(d, "test.csv"), test)
            write_json(os.path.join(d, "truth.json"), truth)

    err_rows = format_table(bench, "error", decimals=4)
    nvar_rows = format_table(bench, "nvar", decimals=1)
    write_csv(os.path.join(out, "error_table.csv"), err_rows[0], err_rows[1:])
    write_csv(os.path.join(out, "nvar_table.csv"), nvar_rows[0], nvar_rows[1:])
    for fname, rows in (("error_table.txt", err_rows), ("nvar_table.txt", nvar_rows)):
        widths = [max(len(str(r[c])) for r in rows) for c in range(len(rows[0]))]
        lines = ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        with open(os.path.join(out, fname), "w") as fh:
            fh.write("\n".join(lines) + "\n")

    failed, probed = probe_failures(bench)
    n_conv, n_fits = convergence_rate(bench)
    config = {
        "example": args.example, "v": vs, "reps": args.reps, "seed": args.seed,
        "methods": bench["methods"], "n_lambda": args.nlambda, "jobs": args.jobs,
        "n_train": args.n_train, "n_tune": args.n_tune, "n_test": args.n_test,
        "write_data": args.write_data,
    }
    body = {
        "records": {str(v): bench["records"][v] for v in vs},
        "probe": {"failed": failed, "probed": probed},
        "convergence": {"converged": n_conv, "fits": n_fits},
        "error_table": err_rows,
        "nvar_table": nvar_rows,
    }
    write_json(os.path.join(out, "simulate.json"), _document("simulate", config, body))
    return _convergence_exit(n_conv, n_fits)


def build_parser():
    p = argparse.ArgumentParser(
        prog="robustpath",
        description="Sparse robust regression and classification with bounded "
                    "nonconvex losses, penalized by lasso/scad/mcp.",
    )
    p.add_argument("--version", action="version", version="robustpath " + __version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_model(sp, penalty_required=True):
        sp.add_argument("--loss", required=True, choices=FAMILIES)
        sp.add_argument("--penalty", choices=PENALTIES, required=penalty_required)
        sp.add_argument("--sigma", type=float, default=None,
                        help="loss shape (Huber transition, kernel width, ...)")
        sp.add_argument("--a", type=float, default=None,
                        help="scad/mcp concavity (defaults 3.7 / 3)")
        sp.add_argument("--alpha", type=float, default=1.0,
                        help="sparse share of the penalty; 1-alpha goes to ridge")
        sp.add_argument("--no-intercept", action="store_true")
        sp.add_argument("--no-standardize", dest="standardize", action="store_false")

    def add_data(sp):
        sp.add_argument("--data", required=True, help="CSV with a header row")
        sp.add_argument("--response", default="y", help="response column name")

    def add_out(sp):
        sp.add_argument("--out", default=None,
                        help="output directory (default: $%s or .)" % OUT_ENV)

    sp = sub.add_parser("fit", help="fit at one penalty level")
    add_data(sp); add_model(sp); add_out(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=None, required=True)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("path", help="fit a warm-started grid of penalty levels")
    add_data(sp); add_model(sp); add_out(sp)
    sp.add_argument("--nlambda", type=int, default=100)
    sp.add_argument("--lambda-min-ratio", type=float, default=None)
    sp.add_argument("--path-direction", choices=("forward", "backward"), default="forward")
    sp.set_defaults(func=cmd_path)

    sp = sub.add_parser("cv", help="select the penalty level by cross-validation")
    add_data(sp); add_model(sp); add_out(sp)
    sp.add_argument("--nlambda", type=int, default=100)
    sp.add_argument("--lambda-min-ratio", type=float, default=None)
    sp.add_argument("--nfolds", type=int, default=5)
    sp.add_argument("--tuning-file", default=None,
                    help="held-out CSV to score instead of folds")
    sp.add_argument("--metric", choices=METRICS, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_cv)

    sp = sub.add_parser("predict", help="score a fitted model on new data")
    sp.add_argument("--model", required=True, help="fit.json from the fit subcommand")
    add_data(sp); add_out(sp)
    sp.set_defaults(func=cmd_predict, response=None)

    sp = sub.add_parser("kkt", help="stationarity report for a fitted model")
    sp.add_argument("--model", required=True)
    add_data(sp); add_out(sp)
    sp.set_defaults(func=cmd_kkt, response=None)

    sp = sub.add_parser("simulate", help="run the synthetic benchmarks")
    add_out(sp)
    sp.add_argument("--example", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--v", default=None, help="contamination percents, comma separated")
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--methods", default=None,
                    help="comma separated method names (see simulate --list-methods)")
    sp.add_argument("--list-methods", action="store_true")
    sp.add_argument("--nlambda", type=int, default=100)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--n-train", type=int, default=None)
    sp.add_argument("--n-tune", type=int, default=None)
    sp.add_argument("--n-test", type=int, default=None)
    sp.add_argument("--write-data", choices=("none", "first", "all"), default="first")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    if getattr(args, "list_methods", False):
        for name in sorted(METHODS[args.example]):
            print(name)
        return EXIT_OK
    try:
        return args.func(args)
    except (InputError, ConfigurationError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
