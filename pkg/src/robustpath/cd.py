"""Penalized weighted least squares by cyclic coordinate descent.

Solves

    min_phi  (B / 2n) * sum_i (h_i - x_i' phi)^2
             + sum_{j>=1} [ alpha p_lam(|beta_j|) + lam (1-alpha)/2 beta_j^2 ]

with the intercept (column 0) unpenalized.  The residual r = h - X phi is
maintained incrementally, so one coordinate update costs O(n).  Sweeps cycle
an active set until the objective stalls, then one verification sweep over all
coordinates either confirms the active set or extends it.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, InputError
from .penalties import PenaltySpec, _threshold, check_threshold_preconditions, penalty_total


@dataclass
class CdConfig:
    tol: float = 1e-7          # relative objective change per sweep
    max_sweeps: int = 10_000
    standardize: bool = True   # center/scale predictors internally


@dataclass
class PwlsProblem:
    """One weighted least-squares subproblem: design, shifted response,
    curvature weight B, and the penalty at level lam."""

    X: np.ndarray
    h: np.ndarray
    B: float
    penalty: PenaltySpec
    lam: float

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.h = np.asarray(self.h, dtype=np.float64)
        if self.X.ndim != 2 or self.h.ndim != 1 or self.h.shape[0] != self.X.shape[0]:
            raise InputError("X and h have incompatible shapes %r, %r" % (self.X.shape, self.h.shape))
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.h))):
            raise InputError("PWLS inputs must be finite")
        if not np.all(self.X[:, 0] == 1.0):
            raise InputError("column 0 of X must be the intercept (all ones)")
        if not (np.isfinite(self.B) and self.B > 0):
            raise InputError("B must be positive, got %r" % (self.B,))
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InputError("lam must be nonnegative, got %r" % (self.lam,))


def pwls_objective(prob, phi):
    """Objective value of the subproblem at phi."""
    phi = np.asarray(phi, dtype=np.float64)
    r = prob.h - prob.X @ phi
    n = prob.h.shape[0]
    return float(prob.B / (2.0 * n) * np.dot(r, r)) + penalty_total(
        prob.penalty, prob.lam, phi[1:]
    )


@njit(cache=True)
def _sweep(XF, r, phi, colsq, B, lam, alpha, kind, a, idx, fit_intercept):
    # One pass over the coordinates listed in idx.  Returns max |delta beta|.
    n = XF.shape[0]
    maxd = 0.0
    for t in range(idx.shape[0]):
        j = idx[t]
        old = phi[j]
        if j == 0:
            if not fit_intercept:
                continue
            s = 0.0
            for i in range(n):
                s += r[i]
            new = old + s / n
        else:
            cs = colsq[j]
            if cs <= 0.0:
                continue  # zero-variance column stays at zero
            v = B * cs / n
            s = 0.0
            for i in range(n):
                s += XF[i, j] * r[i]
            z = B * s / n + v * old
            new = _threshold(z, v, lam, alpha, kind, a)
        delta = new - old
        if delta != 0.0:
            phi[j] = new
            if j == 0:
                for i in range(n):
                    r[i] -= delta
            else:
                for i in range(n):
                    r[i] -= delta * XF[i, j]
            if abs(delta) > maxd:
                maxd = abs(delta)
    return maxd


def _standardize_columns(X, center):
    """Return (X_scaled, mu, sd); intercept column untouched, sd 0 mapped to 1."""
    mu = X[:, 1:].mean(axis=0) if center else np.zeros(X.shape[1] - 1)
    sd = np.sqrt(np.mean((X[:, 1:] - mu) ** 2, axis=0))
    sd = np.where(sd > 0, sd, 1.0)
    Xs = X.copy()
    Xs[:, 1:] = (X[:, 1:] - mu) / sd
    return Xs, mu, sd


def unscale_coefficients(phi_int, mu, sd, fit_intercept):
    """Map coefficients of the scaled problem back to the original columns."""
    phi = np.asarray(phi_int, dtype=np.float64).copy()
    phi[1:] = phi[1:] / sd
    if fit_intercept:
        phi[0] = phi[0] - float(np.dot(phi[1:], mu))
    return phi


def solve_pwls(prob, cfg=None, warm=None, fit_intercept=True):
    """Minimize the penalized subproblem; returns the coefficient vector.

    With cfg.standardize the predictors are centered and scaled internally,
    the penalty applies on that scale, and the returned coefficients are
    mapped back to the original columns (predictions are unchanged).
    """
    cfg = cfg or CdConfig()
    if warm is not None:
        warm = np.asarray(warm, dtype=np.float64)
        if warm.shape != (prob.X.shape[1],):
            raise InputError(
                "warm start has shape %r, expected (%d,)" % (warm.shape, prob.X.shape[1])
            )
    if cfg.standardize:
        Xs, mu, sd = _standardize_columns(prob.X, center=fit_intercept)
        inner = PwlsProblem(Xs, prob.h, prob.B, prob.penalty, prob.lam)
        w = None
        if warm is not None:
            w = warm.copy()
            w[1:] = w[1:] * sd
            if fit_intercept:
                w[0] = w[0] + float(np.dot(warm[1:], mu))
        phi = solve_pwls(inner, CdConfig(cfg.tol, cfg.max_sweeps, False), w, fit_intercept)
        return unscale_coefficients(phi, mu, sd, fit_intercept)

    X, h = prob.X, prob.h
    n, pp1 = X.shape
    pen = prob.penalty
    colsq = np.sum(X * X, axis=0)
    eligible = np.flatnonzero(colsq[1:] > 0.0) + 1
    if eligible.size:
        check_threshold_preconditions(pen, prob.B * colsq[eligible] / n, prob.lam)

    if warm is None:
        phi = np.zeros(pp1)
        active = eligible.copy()
    else:
        phi = np.asarray(warm, dtype=np.float64).copy()
        if phi.shape != (pp1,):
            raise InputError("warm start has shape %r, expected (%d,)" % (phi.shape, pp1))
        if not fit_intercept and phi[0] != 0.0:
            raise InputError("warm start has nonzero intercept but fit_intercept is false")
        sup = np.flatnonzero(phi[1:] != 0.0) + 1
        active = np.intersect1d(sup, eligible) if sup.size else eligible.copy()

    XF = np.asfortranarray(X)
    r = h - X @ phi
    kind, a, alpha = pen.kind, pen.a, pen.alpha
    full_idx = np.concatenate(([0], eligible)).astype(np.int64)

    obj = pwls_objective(prob, phi)
    sweeps = 0
    while True:
        idx = np.concatenate(([0], active)).astype(np.int64)
        while True:
            if sweeps >= cfg.max_sweeps:
                raise ConvergenceError(
                    "coordinate descent exceeded %d sweeps" % cfg.max_sweeps, result=phi
                )
            maxd = _sweep(XF, r, phi, colsq, prob.B, prob.lam, alpha, kind, a, idx, fit_intercept)
            sweeps += 1
            new_obj = prob.B / (2.0 * n) * float(np.dot(r, r)) + penalty_total(
                pen, prob.lam, phi[1:]
            )
            done = maxd == 0.0 or abs(obj - new_obj) <= cfg.tol * max(abs(obj), 1e-12)
            obj = new_obj
            if done:
                break
        if sweeps >= cfg.max_sweeps:
            raise ConvergenceError(
                "coordinate descent exceeded %d sweeps" % cfg.max_sweeps, result=phi
            )
        _sweep(XF, r, phi, colsq, prob.B, prob.lam, alpha, kind, a, full_idx, fit_intercept)
        sweeps += 1
        obj = prob.B / (2.0 * n) * float(np.dot(r, r)) + penalty_total(pen, prob.lam, phi[1:])
        new_active = np.flatnonzero(phi[1:] != 0.0) + 1
        if new_active.size == active.size and np.array_equal(new_active, active):
            break
        active = new_active
    return phi
