"""Certificates for fitted coefficients.

kkt_residual reports per-coordinate stationarity of the penalized problem:
nonzero slopes must zero the smooth gradient plus the penalty derivative;
zero slopes must have gradient inside the subdifferential interval.  For
nonconvex losses stationarity is necessary only, so dini_stationarity_probe
additionally samples directions and checks that no sampled direction gives a
first-order decrease of the full objective.

These functions score the problem exactly as given: pass the standardized
view (mm.internal_problem) when the fit standardized internally.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .losses import loss_grad, loss_value, margins, prediction_gradient, working_response, _bound
from .mm import penalized_objective
from .penalties import penalty_deriv

RULE_INTERCEPT = "intercept"
RULE_NONZERO = "nonzero_stationarity"
RULE_ZERO = "zero_subgradient_bound"
RULE_SKIPPED = "not_estimated"


@dataclass
class KktReport:
    residuals: np.ndarray       # length p+1; index 0 is the intercept
    max_residual: float
    active_set: np.ndarray      # indices (>= 1) of nonzero slopes
    rules: list                 # rule applied per coordinate


def kkt_residual(data, loss, pen, lam, phi, fit_intercept=True):
    """Stationarity residuals of the penalized objective at phi."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (data.X.shape[1],):
        raise InputError("phi has shape %r for %d columns" % (phi.shape, data.X.shape[1]))
    lam = float(lam)
    if lam < 0:
        raise InputError("lam must be nonnegative")
    n = data.n
    g = data.X.T @ prediction_gradient(loss, data.y, data.X @ phi) / n
    res = np.zeros(phi.shape[0])
    rules = [RULE_SKIPPED] * phi.shape[0]
    if fit_intercept:
        res[0] = abs(float(g[0]))
        rules[0] = RULE_INTERCEPT
    beta = phi[1:]
    al, rl = pen.alpha, lam * (1.0 - pen.alpha)
    for j in range(1, phi.shape[0]):
        b = beta[j - 1]
        if b != 0.0:
            d = float(penalty_deriv(pen, lam, abs(b)))
            res[j] = abs(float(g[j]) + al * np.sign(b) * d + rl * b)
            rules[j] = RULE_NONZERO
        else:
            res[j] = max(abs(float(g[j])) - al * lam, 0.0)
            rules[j] = RULE_ZERO
    active = np.flatnonzero(beta != 0.0) + 1
    return KktReport(res, float(np.max(res)), active, rules)


@dataclass
class ProbeResult:
    ok: bool
    worst_ratio: float          # min over directions of (F(phi + tau e) - F(phi)) / tau
    worst_direction: np.ndarray
    n_directions: int


def dini_stationarity_probe(
    data, loss, pen, lam, phi, n_dirs=200, tau=1e-5, seed=0, fit_intercept=True
):
    """Sampled directional-descent check at phi.

    Directions are n_dirs uniform draws on the sphere plus every signed
    coordinate axis; a direction fails if the forward difference ratio drops
    below -10 * tau, which leaves room for curvature at a true stationary
    point.  Intercept-free models probe only slope directions.
    """
    phi = np.asarray(phi, dtype=np.float64)
    pp1 = data.X.shape[1]
    if phi.shape != (pp1,):
        raise InputError("phi has shape %r for %d columns" % (phi.shape, pp1))
    if not (tau > 0 and n_dirs >= 0):
        raise InputError("tau must be positive and n_dirs nonnegative")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), pp1])))
    dirs = rng.standard_normal((n_dirs, pp1))
    axes = np.vstack([np.eye(pp1), -np.eye(pp1)])
    dirs = np.vstack([dirs, axes])
    if not fit_intercept:
        dirs[:, 0] = 0.0
    norms = np.linalg.norm(dirs, axis=1)
    keep = norms > 0
    dirs = dirs[keep] / norms[keep][:, None]

    f0 = penalized_objective(data, loss, pen, lam, phi)
    worst = np.inf
    worst_dir = np.zeros(pp1)
    for e in dirs:
        ratio = (penalized_objective(data, loss, pen, lam, phi + tau * e) - f0) / tau
        if ratio < worst:
            worst = ratio
            worst_dir = e
    return ProbeResult(bool(worst >= -10.0 * tau), float(worst), worst_dir, int(len(dirs)))


def fd_gradient_check(loss, n_samples=1000, seed=0, step=1e-5, umax=20.0):
    """Max relative error of loss_grad against central differences.

    Relative to max(1, |gradient|); draws are uniform on [-umax, umax].
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 1])))
    u = rng.uniform(-umax, umax, n_samples)
    num = (loss_value(loss, u + step) - loss_value(loss, u - step)) / (2.0 * step)
    g = loss_grad(loss, u)
    return float(np.max(np.abs(num - g) / np.maximum(1.0, np.abs(g))))


def majorization_audit(loss, n_samples=1000, seed=0, umax=20.0):
    """Check the quadratic surrogate dominates the loss and touches at u = z.

    Returns (worst_gap, worst_touch): the most negative value of
    surrogate - loss over sampled (u, z) pairs (>= -1e-10 when the curvature
    bound holds) and the largest |surrogate - loss| at u = z.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 2])))
    u = rng.uniform(-umax, umax, n_samples)
    z = rng.uniform(-umax, umax, n_samples)
    B = _bound(loss)
    def surrogate(uu):
        return loss_value(loss, z) + loss_grad(loss, z) * (uu - z) + 0.5 * B * (uu - z) ** 2

    gap = float(np.min(surrogate(u) - loss_value(loss, u)))
    touch = float(np.max(np.abs(surrogate(z) - loss_value(loss, z))))
    return gap, touch
