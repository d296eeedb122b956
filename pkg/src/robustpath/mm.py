"""Majorization-minimization driver for penalized loss minimization.

Each outer iteration linearizes the loss at the current predictor, builds the
shifted response h, and solves one penalized weighted least-squares problem by
coordinate descent, warm-started at the current coefficients.  Because the
quadratic touches the loss at the expansion point, the objective

    F(phi) = (1/n) sum_i Gamma(u_i(phi)) + sum_{j>=1} penalty(beta_j)

is nonincreasing along the iterates; any increase beyond roundoff indicates a
broken curvature bound and raises immediately.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .cd import CdConfig, PwlsProblem, _standardize_columns, solve_pwls, unscale_coefficients
from .data import CLASSIFICATION, REGRESSION, Dataset
from .errors import ConfigurationError, ConvergenceError, DescentViolationError, InputError
from .losses import (
    _bound,
    loss_grad,
    loss_spec,
    loss_value,
    margins,
    prediction_gradient,
    working_response,
)
from .penalties import penalty_deriv, penalty_total, penalty_spec

log = logging.getLogger(__name__)

INIT_MODES = ("zeros", "intercept_only", "convex_pilot", "custom")


@dataclass
class FitConfig:
    outer_tol: float = 1e-6      # relative objective change across MM steps
    max_outer: int = 500
    init: str = "convex_pilot"
    init_phi: np.ndarray = None  # used when init == "custom"
    fit_intercept: bool = True

    def __post_init__(self):
        if self.init not in INIT_MODES:
            raise InputError("init must be one of %r, got %r" % (INIT_MODES, self.init))


@dataclass
class FitResult:
    """Converged (or truncated) fit.

    phi is on the original column scale.  objective_trace and
    kkt_max_residual refer to the problem actually minimized: when the fit
    standardized internally, that is the standardized-column problem, whose
    view is recoverable through internal_problem().
    """

    phi: np.ndarray
    objective_trace: list
    n_outer: int
    converged: bool
    kkt_max_residual: float
    lam: float = 0.0
    scaling: tuple = None
    fit_intercept: bool = True


def penalized_objective(data, loss, pen, lam, phi):
    """F(phi) = mean loss + slope penalties, on the columns of data as given."""
    phi = np.asarray(phi, dtype=np.float64)
    f = data.X @ phi
    u = margins(loss, data.y, f)
    return float(np.mean(loss_value(loss, u))) + penalty_total(pen, lam, phi[1:])


def standardized_view(data, fit_intercept=True):
    """Centered/scaled copy of the dataset, with the applied (mu, sd)."""
    Xs, mu, sd = _standardize_columns(data.X, center=fit_intercept)
    return Dataset(Xs, data.y, data.task, data.feature_names), mu, sd


def internal_problem(data, result):
    """Dataset and coefficients on the scale the fit actually minimized."""
    if result.scaling is None:
        return data, np.asarray(result.phi, dtype=np.float64).copy()
    mu, sd = result.scaling
    view, mu2, sd2 = standardized_view(data, result.fit_intercept)
    if not (np.allclose(mu, mu2) and np.allclose(sd, sd2)):
        raise InputError("dataset does not match the one this fit was produced from")
    phi = np.asarray(result.phi, dtype=np.float64).copy()
    phi[1:] = phi[1:] * sd
    if result.fit_intercept:
        phi[0] = phi[0] + float(np.dot(np.asarray(result.phi)[1:], mu))
    return view, phi


def _kkt_max(X, y, loss, pen, lam, phi, fit_intercept):
    # Max stationarity residual of the penalized problem at phi.
    n = X.shape[0]
    g = X.T @ prediction_gradient(loss, y, X @ phi) / n
    worst = abs(float(g[0])) if fit_intercept else 0.0
    beta = phi[1:]
    al, rl = pen.alpha, lam * (1.0 - pen.alpha)
    nz = beta != 0.0
    if np.any(nz):
        d = penalty_deriv(pen, lam, np.abs(beta[nz]))
        res = np.abs(g[1:][nz] + al * np.sign(beta[nz]) * d + rl * beta[nz])
        worst = max(worst, float(np.max(res)))
    if np.any(~nz):
        res = np.maximum(np.abs(g[1:][~nz]) - al * lam, 0.0)
        worst = max(worst, float(np.max(res)))
    return worst


def _check_data_loss(data, loss):
    if data.task != loss.task:
        raise InputError(
            "loss %r expects %s data, got %s" % (loss.family, loss.task, data.task)
        )


def _resolve_init(data, loss, pen, lam, cfg, cd):
    if cfg.init == "custom":
        if cfg.init_phi is None:
            raise InputError("init='custom' requires init_phi")
        phi0 = np.asarray(cfg.init_phi, dtype=np.float64).copy()
        if phi0.shape != (data.X.shape[1],):
            raise InputError(
                "init_phi has shape %r, expected (%d,)" % (phi0.shape, data.X.shape[1])
            )
        return phi0
    phi0 = np.zeros(data.X.shape[1])
    if cfg.init == "zeros":
        return phi0
    if cfg.init == "intercept_only":
        if cfg.fit_intercept:
            phi0[0] = intercept_only_fit(data, loss)
        return phi0
    # convex_pilot: for convex losses the pilot is the fit itself, so just
    # start from zero; otherwise fit the convex stand-in at the same penalty.
    if loss.convex:
        return phi0
    pilot_loss = loss_spec("huber" if loss.task == REGRESSION else "logistic")
    pilot_cfg = FitConfig(cfg.outer_tol, cfg.max_outer, "zeros", None, cfg.fit_intercept)
    for pilot_pen in (pen, penalty_spec("lasso", alpha=pen.alpha)):
        try:
            return fit(data, pilot_loss, pilot_pen, lam, pilot_cfg, cd).phi
        except ConvergenceError as e:
            return np.asarray(e.result.phi, dtype=np.float64)
        except ConfigurationError:
            # the pilot's flatter curvature can make a nonconvex penalty's
            # coordinate update ill-posed; retry with the lasso at the same lam
            continue
    return phi0


def fit(data, loss, pen, lam, cfg=None, cd=None):
    """Penalized MM fit at one penalty level.

    Arguments
    ---------
    data : Dataset
    loss : LossSpec
    pen : PenaltySpec
    lam : float, nonnegative penalty level
    cfg : FitConfig, outer-loop controls
    cd : CdConfig, inner coordinate-descent controls

    Returns a FitResult with coefficients on the original column scale.
    Raises ConvergenceError (carrying the truncated result) if max_outer is
    exhausted; raises DescentViolationError if the objective ever increases
    beyond roundoff, which indicates a broken curvature bound.
    """
    cfg = cfg or FitConfig()
    cd = cd or CdConfig()
    _check_data_loss(data, loss)
    lam = float(lam)
    if not (np.isfinite(lam) and lam >= 0.0):
        raise InputError("lam must be nonnegative, got %r" % (lam,))

    phi0 = _resolve_init(data, loss, pen, lam, cfg, cd)
    if not cfg.fit_intercept and phi0[0] != 0.0:
        phi0[0] = 0.0

    if cd.standardize:
        Xw, mu, sd = _standardize_columns(data.X, center=cfg.fit_intercept)
        scaling = (mu, sd)
        phi = phi0.copy()
        phi[1:] = phi0[1:] * sd
        if cfg.fit_intercept:
            phi[0] = phi0[0] + float(np.dot(phi0[1:], mu))
    else:
        Xw, scaling = data.X, None
        phi = phi0.copy()

    y = data.y
    B = _bound(loss)
    cd_inner = CdConfig(cd.tol, cd.max_sweeps, standardize=False)

    def F(ph):
        u = margins(loss, y, Xw @ ph)
        return float(np.mean(loss_value(loss, u))) + penalty_total(pen, lam, ph[1:])

    obj = F(phi)
    trace = [obj]
    converged = False
    n_outer = 0
    for n_outer in range(1, cfg.max_outer + 1):
        h = working_response(loss, y, Xw @ phi, B)
        prob = PwlsProblem(Xw, h, B, pen, lam)
        try:
            phi_new = solve_pwls(prob, cd_inner, warm=phi, fit_intercept=cfg.fit_intercept)
        except ConvergenceError as e:
            phi = np.asarray(e.result, dtype=np.float64)
            trace.append(F(phi))
            break
        new_obj = F(phi_new)
        if new_obj > obj + 1e-8:
            raise DescentViolationError(
                "objective rose from %.12g to %.12g at outer step %d" % (obj, new_obj, n_outer)
            )
        phi = phi_new
        trace.append(new_obj)
        if abs(obj - new_obj) <= cfg.outer_tol * max(abs(obj), 1e-10):
            converged = True
            obj = new_obj
            break
        obj = new_obj

    kkt = _kkt_max(Xw, y, loss, pen, lam, phi, cfg.fit_intercept)
    phi_raw = unscale_coefficients(phi, *scaling, cfg.fit_intercept) if scaling else phi
    result = FitResult(
        phi_raw, trace, n_outer, converged, kkt, lam, scaling, cfg.fit_intercept
    )
    if not converged:
        raise ConvergenceError(
            "MM did not converge within %d outer iterations" % cfg.max_outer, result=result
        )
    return result


def fit_unpenalized(data, loss, cfg=None):
    """MM fit with no penalty: each step solves plain least squares on h.

    Rank-deficient designs take the minimum-norm solution, so the result is
    deterministic.  On data where the unpenalized optimum does not exist
    (e.g. one-class classification), the trace is truncated at max_outer and
    the result is returned with converged=False rather than raising.
    """
    cfg = cfg or FitConfig()
    _check_data_loss(data, loss)
    X, y = data.X, data.y
    cols = slice(None) if cfg.fit_intercept else slice(1, None)

    if cfg.init == "convex_pilot" and not loss.convex:
        pilot_loss = loss_spec("huber" if loss.task == REGRESSION else "logistic")
        pilot_cfg = FitConfig(cfg.outer_tol, cfg.max_outer, "zeros", None, cfg.fit_intercept)
        phi = np.asarray(fit_unpenalized(data, pilot_loss, pilot_cfg).phi).copy()
    else:
        phi = _resolve_init(data, loss, penalty_spec("lasso"), 0.0, cfg, CdConfig(standardize=False))
        if not cfg.fit_intercept:
            phi[0] = 0.0

    B = _bound(loss)

    def F(ph):
        return float(np.mean(loss_value(loss, margins(loss, y, X @ ph))))

    obj = F(phi)
    trace = [obj]
    converged = False
    n_outer = 0
    for n_outer in range(1, cfg.max_outer + 1):
        h = working_response(loss, y, X @ phi, B)
        sol, *_ = np.linalg.lstsq(X[:, cols], h, rcond=None)
        phi_new = np.zeros_like(phi)
        phi_new[cols] = sol
        new_obj = F(phi_new)
        if new_obj > obj + 1e-8:
            raise DescentViolationError(
                "objective rose from %.12g to %.12g at outer step %d" % (obj, new_obj, n_outer)
            )
        phi = phi_new
        trace.append(new_obj)
        if abs(obj - new_obj) <= cfg.outer_tol * max(abs(obj), 1e-10):
            converged = True
            obj = new_obj
            break
        obj = new_obj

    n = X.shape[0]
    g = X.T @ prediction_gradient(loss, y, X @ phi) / n
    kkt = float(np.max(np.abs(g[cols]))) if X[:, cols].shape[1] else 0.0
    return FitResult(phi, trace, n_outer, converged, kkt, 0.0, None, cfg.fit_intercept)


def intercept_only_fit(data, loss):
    """Minimize the empirical loss over the intercept alone.

    Bounded losses can be multimodal in the intercept, so a dense scan over
    [-R, R] (augmented with every response value for regression) locates the
    best basin before golden-section and derivative-bisection refinement.
    """
    _check_data_loss(data, loss)
    y = data.y
    if loss.task == REGRESSION:
        mval = lambda b: np.mean(loss_value(loss, y[:, None] - np.atleast_1d(b)[None, :]), axis=0)
        mgrad = lambda b: -np.mean(loss_grad(loss, y - b))
    else:
        mval = lambda b: np.mean(loss_value(loss, y[:, None] * np.atleast_1d(b)[None, :]), axis=0)
        mgrad = lambda b: np.mean(y * loss_grad(loss, y * b))

    R = max(10.0, 10.0 * float(np.max(np.abs(y))))
    grid = np.linspace(-R, R, 4001)
    cand = np.concatenate([grid, y]) if loss.task == REGRESSION else grid
    vals = mval(cand)
    # Near-ties go to the smallest |b|: a flat objective (balanced labels
    # under a CDF-symmetric loss) then yields 0, not a scan endpoint.
    vmin = float(np.min(vals))
    near = np.flatnonzero(vals <= vmin + 1e-12 * max(1.0, abs(vmin)))
    best = float(cand[near[int(np.argmin(np.abs(cand[near])))]])
    if abs(best) >= R - (2.0 * R / 4000.0):
        log.warning("intercept-only minimum sits at the search boundary (%g)", best)

    # Bracket the basin around the best candidate and refine.
    width = max(2.0 * R / 4000.0, 4.0 * loss.sigma if not loss.convex else 0.0)
    lo, hi = best - width, best + width
    local = np.linspace(lo, hi, 2001)
    vals = mval(local)
    k = int(np.argmin(vals))
    lo, hi = local[max(k - 1, 0)], local[min(k + 1, 2000)]

    # Golden-section on the bracket.
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc, fd = float(mval(c)[0]), float(mval(d)[0])
    while hi - lo > 1e-13 * max(1.0, abs(lo) + abs(hi)):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = float(mval(c)[0])
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = float(mval(d)[0])
    b = 0.5 * (lo + hi)

    # Polish on the derivative when it brackets a sign change.
    span = max(1e-6, 1e-6 * abs(b))
    lo, hi = b - span, b + span
    glo, ghi = mgrad(lo), mgrad(hi)
    if glo < 0.0 < ghi:
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            gm = mgrad(mid)
            if gm < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * max(1.0, abs(mid)):
                break
        b = 0.5 * (lo + hi)

    # A plateau gives refinement nothing to improve and lets it drift;
    # keep the scan's pick (smallest near-tied |b|) over a drifted endpoint.
    vb = float(mval(b)[0])
    if float(mval(best)[0]) <= vb + 1e-12 * max(1.0, abs(vb)) and abs(best) < abs(b):
        b = best
    return float(b)
