"""Penalty-level grids, solution paths, and tuning.

lambda_max is the smallest penalty level at which the zero-slope model (with
its optimal intercept) is stationary; it anchors a log-spaced grid.  Paths are
solved warm-started in either direction: "forward" walks from lambda_max down
(each fit starts at the previous solution), "backward" fits the least
penalized model first and walks up.  Results are always reported with lambda
descending.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cd import CdConfig
from .data import CLASSIFICATION, Dataset, REGRESSION
from .errors import ConvergenceError, InputError
from .losses import loss_grad, loss_value, margins, prediction_gradient
from .mm import FitConfig, fit, intercept_only_fit, penalized_objective, standardized_view

METRICS = ("mse", "misclass", "loss")


@dataclass
class PathConfig:
    n_lambda: int = 100
    eps: float = None            # lambda_min / lambda_max; resolved per data shape
    direction: str = "forward"

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise InputError("direction must be 'forward' or 'backward'")
        if self.n_lambda < 1:
            raise InputError("n_lambda must be >= 1")
        if self.eps is not None and not (0.0 < self.eps < 1.0):
            raise InputError("eps must be in (0, 1)")


@dataclass
class PathResult:
    lambdas: np.ndarray          # descending
    coefs: np.ndarray            # (K, p+1), original column scale
    per_lambda: list             # dicts: lambda, converged, n_outer, kkt_max, objective
    direction: str


def _slope_gradient_scale(data, loss, fit_intercept, standardize):
    """|mean-gradient| per slope at the zero-slope model, on the fit scale."""
    b0 = intercept_only_fit(data, loss) if fit_intercept else 0.0
    X = standardized_view(data, fit_intercept)[0].X if standardize else data.X
    f = np.full(data.n, b0)
    d = prediction_gradient(loss, data.y, f)
    return np.abs(X[:, 1:].T @ d) / data.n, b0


def lambda_max(data, loss, alpha=1.0, fit_intercept=True, standardize=False):
    """Smallest penalty level whose zero-slope model is stationary."""
    if not (0.0 < alpha <= 1.0):
        raise InputError("alpha must be in (0, 1]")
    if data.p == 0:
        return 0.0
    g, _ = _slope_gradient_scale(data, loss, fit_intercept, standardize)
    return float(np.max(g)) / alpha


def lambda_max_closed_form(data, loss, alpha=1.0, fit_intercept=True, standardize=False):
    """lambda_max for the bounded losses, from the per-family closed forms."""
    if not (0.0 < alpha <= 1.0):
        raise InputError("alpha must be in (0, 1]")
    if data.p == 0:
        return 0.0
    b0 = intercept_only_fit(data, loss) if fit_intercept else 0.0
    X = standardized_view(data, fit_intercept)[0].X if standardize else data.X
    Xs, y, n, s = X[:, 1:], data.y, data.n, loss.sigma
    f = loss.family
    if f == "clossr":
        w = (y - b0) * np.exp(-((y - b0) ** 2) / (2.0 * s * s))
        col = np.abs(Xs.T @ w) / (n * alpha * s * s)
    elif f == "closs":
        c = 1.0 / (1.0 - np.exp(-1.0 / (2.0 * s * s)))
        w = (y - b0) * np.exp(-((1.0 - y * b0) ** 2) / (2.0 * s * s))
        col = c * np.abs(Xs.T @ w) / (n * alpha * s * s)
    elif f == "gloss":
        e = np.exp(y * b0)
        w = y * e * (1.0 + e) ** (-(s + 1.0))
        col = s * 2.0**s * np.abs(Xs.T @ w) / (n * alpha)
    elif f == "qloss":
        w = y * np.exp(-(b0 * b0) / (2.0 * s * s))
        col = np.sqrt(2.0 / np.pi) * np.abs(Xs.T @ w) / (n * alpha * s)
    else:
        raise InputError("no closed form for loss %r" % (f,))
    return float(np.max(col))


def lambda_grid(lam_max, n_lambda=100, eps=1e-3):
    """Log-spaced descending grid from lam_max to eps * lam_max, inclusive."""
    if not (np.isfinite(lam_max) and lam_max > 0):
        raise InputError("lam_max must be positive, got %r" % (lam_max,))
    if not (0.0 < eps < 1.0):
        raise InputError("eps must be in (0, 1)")
    if n_lambda == 1:
        return np.array([lam_max])
    return np.exp(np.linspace(np.log(lam_max), np.log(eps * lam_max), n_lambda))


def _resolve_eps(cfg, data):
    if cfg.eps is not None:
        return cfg.eps
    return 0.05 if data.n < data.p else 1e-3


def solution_path(data, loss, pen, cfg=None, fit_cfg=None, cd_cfg=None, lambdas=None):
    """Fit the whole grid with warm starts; never aborts on a single bad fit.

    Per-lambda convergence failures keep the truncated iterate and are
    recorded in per_lambda.  The first fit in the walking order uses the
    configured initialization (convex pilot by default); later fits start at
    the neighboring solution.
    """
    cfg = cfg or PathConfig()
    fit_cfg = fit_cfg or FitConfig()
    cd_cfg = cd_cfg or CdConfig()
    if lambdas is None:
        lmax = lambda_max(
            data, loss, pen.alpha, fit_cfg.fit_intercept, cd_cfg.standardize
        )
        if lmax <= 0.0:
            raise InputError("lambda_max is zero: no penalized slopes to trace")
        lambdas = lambda_grid(lmax, cfg.n_lambda, _resolve_eps(cfg, data))
    else:
        lambdas = np.asarray(lambdas, dtype=np.float64)
        if np.any(np.diff(lambdas) > 0):
            raise InputError("explicit lambdas must be descending")

    order = range(len(lambdas)) if cfg.direction == "forward" else range(len(lambdas) - 1, -1, -1)
    coefs = np.zeros((len(lambdas), data.X.shape[1]))
    per_lambda = [None] * len(lambdas)
    warm = None
    for k in order:
        if warm is None:
            fc = fit_cfg
        else:
            fc = FitConfig(fit_cfg.outer_tol, fit_cfg.max_outer, "custom", warm, fit_cfg.fit_intercept)
        try:
            res = fit(data, loss, pen, float(lambdas[k]), fc, cd_cfg)
        except ConvergenceError as e:
            res = e.result
        coefs[k] = res.phi
        per_lambda[k] = {
            "lambda": float(lambdas[k]),
            "converged": bool(res.converged),
            "n_outer": int(res.n_outer),
            "kkt_max": float(res.kkt_max_residual),
            "objective": float(res.objective_trace[-1]),
        }
        warm = res.phi
    return PathResult(lambdas, coefs, per_lambda, cfg.direction)


def predictions(data, coefs):
    """Linear predictors for one coefficient vector or a (K, p+1) stack."""
    return data.X @ np.asarray(coefs, dtype=np.float64).T


def evaluate_metric(data, loss, coefs, metric):
    """Score one coefficient vector (or each row of a stack) on held-out data."""
    if metric not in METRICS:
        raise InputError("metric must be one of %r" % (METRICS,))
    phi = np.atleast_2d(np.asarray(coefs, dtype=np.float64))
    f = data.X @ phi.T
    y = data.y[:, None]
    if metric == "mse":
        if data.task != REGRESSION:
            raise InputError("mse requires regression data")
        out = np.mean((y - f) ** 2, axis=0)
    elif metric == "misclass":
        if data.task != CLASSIFICATION:
            raise InputError("misclass requires classification data")
        out = np.mean(np.where(f >= 0.0, 1.0, -1.0) != y, axis=0)
    else:
        u = margins(loss, y, f)
        out = np.mean(loss_value(loss, u), axis=0)
    return out if np.asarray(coefs).ndim == 2 else float(out[0])


def default_metric(task):
    return "mse" if task == REGRESSION else "misclass"


def select_lambda(lambdas, scores):
    """Index of the best score; exact ties go to the larger lambda."""
    scores = np.asarray(scores, dtype=np.float64)
    ok = np.isfinite(scores)
    if not np.any(ok):
        raise InputError("no finite tuning scores")
    best = np.min(scores[ok])
    for k in range(len(lambdas)):  # lambdas descend, so first hit is largest
        if ok[k] and scores[k] == best:
            return k
    raise AssertionError("unreachable")


def _fold_assignments(n, k, seed):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), n, k])))
    perm = rng.permutation(n)
    folds = np.empty(n, dtype=np.int64)
    for i, chunk in enumerate(np.array_split(perm, k)):
        folds[chunk] = i
    return folds


def _cv_fold(args):
    dtr, dva, loss, pen, cfg, fit_cfg, cd_cfg, lambdas, metric = args
    path = solution_path(data=dtr, loss=loss, pen=pen, cfg=cfg,
                         fit_cfg=fit_cfg, cd_cfg=cd_cfg, lambdas=lambdas)
    return evaluate_metric(dva, loss, path.coefs, metric), path


def cross_validate(
    data,
    loss,
    pen,
    cfg=None,
    folds=5,
    metric=None,
    fit_cfg=None,
    cd_cfg=None,
    seed=0,
    jobs=1,
    return_detail=False,
):
    """Pick the penalty level by k-fold CV or an explicit tuning set.

    folds is either an integer >= 2 (rows are partitioned deterministically
    from the seed) or a Dataset scored as a single held-out set.  The grid is
    anchored at lambda_max of the full training data either way.  Returns
    (best_lambda, table) where table rows carry per-lambda mean and sd of the
    metric and the count of folds used; classification folds containing a
    single class are recorded as missing and excluded from means.
    """
    cfg = cfg or PathConfig()
    fit_cfg = fit_cfg or FitConfig()
    cd_cfg = cd_cfg or CdConfig()
    metric = metric or default_metric(data.task)
    lmax = lambda_max(data, loss, pen.alpha, fit_cfg.fit_intercept, cd_cfg.standardize)
    if lmax <= 0.0:
        raise InputError("lambda_max is zero: no penalized slopes to trace")
    lambdas = lambda_grid(lmax, cfg.n_lambda, _resolve_eps(cfg, data))

    if isinstance(folds, Dataset):
        path = solution_path(data, loss, pen, cfg, fit_cfg, cd_cfg, lambdas)
        scores = evaluate_metric(folds, loss, path.coefs, metric)
        per_fold = scores[:, None]
        assignments = None
        paths = [path]
    else:
        k = int(folds)
        if k < 2 or k > data.n:
            raise InputError("folds must be between 2 and n")
        assignments = _fold_assignments(data.n, k, seed)
        per_fold = np.full((len(lambdas), k), np.nan)
        paths = [None] * k
        runnable = []
        for i in range(k):
            tr = assignments != i
            dtr = Dataset(data.X[tr], data.y[tr], data.task, data.feature_names)
            dva = Dataset(data.X[~tr], data.y[~tr], data.task, data.feature_names)
            if data.task == CLASSIFICATION and (
                np.unique(dva.y).size < 2 or np.unique(dtr.y).size < 2
            ):
                continue  # recorded as missing
            runnable.append((i, dtr, dva))
        work = [(dtr, dva, loss, pen, cfg, fit_cfg, cd_cfg, lambdas, metric)
                for _, dtr, dva in runnable]
        if jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(max_workers=min(int(jobs), len(work))) as pool:
                done = list(pool.map(_cv_fold, work))
        else:
            done = [_cv_fold(w) for w in work]
        for (i, _, _), (scores, path) in zip(runnable, done):
            per_fold[:, i] = scores
            paths[i] = path

    finite = np.isfinite(per_fold)
    n_used = np.sum(finite, axis=1)
    filled = np.where(finite, per_fold, 0.0)
    means = np.where(n_used > 0, filled.sum(axis=1) / np.maximum(n_used, 1), np.nan)
    dev = np.where(finite, per_fold - means[:, None], 0.0)
    var = np.where(n_used > 1, (dev * dev).sum(axis=1) / np.maximum(n_used - 1, 1), 0.0)
    sds = np.sqrt(var)
    best = select_lambda(lambdas, means)
    table = [
        {
            "lambda": float(lambdas[i]),
            "mean": float(means[i]) if np.isfinite(means[i]) else None,
            "sd": float(sds[i]) if np.isfinite(sds[i]) else None,
            "n_folds": int(n_used[i]),
        }
        for i in range(len(lambdas))
    ]
    if return_detail:
        return float(lambdas[best]), table, {
            "index": best,
            "lambdas": lambdas,
            "per_fold": per_fold,
            "assignments": assignments,
            "paths": paths,
        }
    return float(lambdas[best]), table
