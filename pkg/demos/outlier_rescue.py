"""Gross response outliers: least squares folds, a bounded loss does not.

The generator draws a correlated 8-feature linear model whose true support
is features 1, 2, and 5, then multiplies 20 percent of the training and
tuning responses by 1000.  We trace a penalty path for each method, pick
lambda on the tuning split, and score the population prediction error in
closed form against the generating model.

Run:  python3 demos/outlier_rescue.py      (about a second)
"""

import numpy as np

from robustpath import (
    CdConfig,
    FitConfig,
    PathConfig,
    evaluate_metric,
    loss_spec,
    penalty_spec,
    select_lambda,
    solution_path,
)
from robustpath.datagen import SimSpec, example1_mse, generate

METHODS = [
    ("ls + lasso", "ls", "lasso"),
    ("huber + lasso", "huber", "lasso"),
    ("clossr + mcp", "clossr", "mcp"),
]


def one_run(v, seed=3):
    train, tune, _, truth = generate(SimSpec(1, v=v, seed=seed))
    rows = []
    for label, lossname, penname in METHODS:
        loss, pen = loss_spec(lossname), penalty_spec(penname)
        path = solution_path(train, loss, pen, PathConfig(n_lambda=60),
                             FitConfig(), CdConfig())
        scores = evaluate_metric(tune, loss, path.coefs, "loss")
        k = select_lambda(path.lambdas, scores)
        phi = path.coefs[k]
        rows.append((label, float(path.lambdas[k]), example1_mse(truth, phi), phi))
    return rows, truth


def main():
    print("population MSE after tuning (truth support: x1, x2, x5)")
    print()
    for v in (0, 20):
        rows, truth = one_run(v)
        print("contamination v = %d%%" % v)
        for label, lam, mse, phi in rows:
            active = [j for j, b in enumerate(phi[1:], start=1) if b != 0.0]
            shown = "%.4g" % mse if mse < 1e4 else "> 1e4"
            print("  %-14s lam=%-9.4g mse=%-10s active=%s" % (label, lam, shown, active))
        print()

    rows, truth = one_run(20)
    target = np.concatenate([[truth["beta0"]], truth["beta"]])
    print("coefficients at v = 20% (truth in the last row)")
    names = ["b0"] + ["x%d" % j for j in range(1, 9)]
    print("  %-14s " % "" + "".join("%8s" % nm for nm in names))
    for label, _, _, phi in rows:
        print("  %-14s " % label + "".join("%8.2f" % b for b in phi))
    print("  %-14s " % "truth" + "".join("%8.2f" % b for b in target))


if __name__ == "__main__":
    main()
