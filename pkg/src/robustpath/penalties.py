"""Sparsity penalties and the exact 1-D threshold update.

Three families: "lasso", "scad" (concavity parameter a > 2), and "mcp"
(a > 1).  Each is combined with an optional ridge share: the full per-slope
penalty is

    alpha * p_lam(|beta|) + lam * (1 - alpha) / 2 * beta^2,      0 < alpha <= 1.

threshold_update minimizes

    g(beta) = (v / 2) beta^2 - z beta + alpha p_lam(|beta|)
              + lam (1 - alpha) / 2 * beta^2

exactly by closed form.  Writing d = v + lam (1 - alpha) and S(z, g) =
sign(z) max(|z| - g, 0), the minimizer is:

    lasso:  S(z, alpha lam) / d
    mcp:    S(z, alpha lam) / (d - alpha / a)   if |z| <= a lam d, else z / d
    scad:   S(z, alpha lam) / d                 if |z| <= lam (d + alpha)
            S(z, a alpha lam / (a-1)) / (d - alpha / (a-1))
                                                if lam (d + alpha) < |z| <= a lam d
            z / d                               otherwise

Regime boundaries resolve to the more-shrunk branch; the objective is
continuous there so the choice is value-neutral.  The inner denominators must
be positive (the 1-D problem is strictly convex piecewise); otherwise a
ConfigurationError is raised rather than returning one of several local
minimizers.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, InputError

PENALTIES = ("lasso", "scad", "mcp")
DEFAULT_A = {"scad": 3.7, "mcp": 3.0}
_KIND = {"lasso": 0, "scad": 1, "mcp": 2}


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family with concavity parameter a and ridge mixing alpha."""

    family: str
    a: float
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in PENALTIES:
            raise InputError("unknown penalty %r; choose from %r" % (self.family, PENALTIES))
        if self.family == "scad" and not self.a > 2.0:
            raise InputError("scad needs a > 2, got %r" % (self.a,))
        if self.family == "mcp" and not self.a > 1.0:
            raise InputError("mcp needs a > 1, got %r" % (self.a,))
        if not (0.0 < self.alpha <= 1.0):
            raise InputError("alpha must be in (0, 1]; got %r" % (self.alpha,))

    @property
    def kind(self):
        return _KIND[self.family]


def penalty_spec(family, a=None, alpha=1.0):
    """Look up a penalty family by name; a defaults to 3.7 (scad) / 3 (mcp)."""
    family = str(family).lower()
    if family not in PENALTIES:
        raise InputError("unknown penalty %r; choose from %r" % (family, PENALTIES))
    if a is None:
        a = DEFAULT_A.get(family, 0.0)
    return PenaltySpec(family, float(a), float(alpha))


def penalty_value(spec, lam, theta):
    """p_lam(theta) for theta >= 0, vectorized in theta (ridge share excluded)."""
    if lam < 0:
        raise InputError("lam must be nonnegative")
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta < 0):
        raise InputError("theta must be nonnegative")
    a = spec.a
    if spec.family == "lasso":
        out = lam * theta
    elif spec.family == "mcp":
        out = np.where(theta <= a * lam, lam * theta - theta * theta / (2.0 * a), 0.5 * a * lam * lam)
    else:  # scad
        mid = (2.0 * a * lam * theta - theta * theta - lam * lam) / (2.0 * (a - 1.0))
        out = np.where(
            theta <= lam, lam * theta, np.where(theta <= a * lam, mid, 0.5 * (a + 1.0) * lam * lam)
        )
    return float(out) if out.ndim == 0 else out


def penalty_deriv(spec, lam, theta):
    """p'_lam(theta) for theta > 0, vectorized in theta."""
    if lam < 0:
        raise InputError("lam must be nonnegative")
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta <= 0):
        raise InputError("theta must be positive; the subgradient at 0 is an interval")
    a = spec.a
    if spec.family == "lasso":
        out = np.full_like(theta, lam)
    elif spec.family == "mcp":
        out = np.maximum(lam - theta / a, 0.0) * (theta <= a * lam)
    else:  # scad
        out = np.where(theta <= lam, lam, np.maximum(a * lam - theta, 0.0) / (a - 1.0))
    return float(out) if out.ndim == 0 else out


def penalty_total(spec, lam, beta):
    """Sum over slopes of the mixed penalty, including the ridge share."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.size == 0:
        return 0.0
    ab = np.abs(beta)
    tot = spec.alpha * float(np.sum(penalty_value(spec, lam, ab)))
    if spec.alpha < 1.0:
        tot += 0.5 * lam * (1.0 - spec.alpha) * float(np.sum(beta * beta))
    return tot


@njit(cache=True)
def _soft(z, g):
    az = abs(z) - g
    if az <= 0.0:
        return 0.0
    return az if z > 0.0 else -az


@njit(cache=True)
def _threshold(z, v, lam, alpha, kind, a):
    d = v + lam * (1.0 - alpha)
    if kind == 0:  # lasso
        return _soft(z, alpha * lam) / d
    az = abs(z)
    if kind == 2:  # mcp
        if az > a * lam * d:
            return z / d
        return _soft(z, alpha * lam) / (d - alpha / a)
    # scad
    if az <= lam * (d + alpha):
        return _soft(z, alpha * lam) / d
    if az <= a * lam * d:
        return _soft(z, a * alpha * lam / (a - 1.0)) / (d - alpha / (a - 1.0))
    return z / d


def check_threshold_preconditions(spec, v, lam):
    """Raise ConfigurationError unless every threshold regime is strictly convex."""
    if not np.all(np.asarray(v) > 0.0):
        raise ConfigurationError("threshold update needs v > 0, got v=%r" % (v,))
    vmin = float(np.min(v))
    d = vmin + lam * (1.0 - spec.alpha)
    if spec.family == "mcp" and d - spec.alpha / spec.a <= 0.0:
        raise ConfigurationError(
            "mcp coordinate update not strictly convex: v=%g, lam=%g, alpha=%g, a=%g "
            "give d - alpha/a = %g <= 0; increase a or lower alpha"
            % (vmin, lam, spec.alpha, spec.a, d - spec.alpha / spec.a)
        )
    if spec.family == "scad" and d - spec.alpha / (spec.a - 1.0) <= 0.0:
        raise ConfigurationError(
            "scad coordinate update not strictly convex: v=%g, lam=%g, alpha=%g, a=%g "
            "give d - alpha/(a-1) = %g <= 0; increase a or lower alpha"
            % (vmin, lam, spec.alpha, spec.a, d - spec.alpha / (spec.a - 1.0))
        )


def threshold_update(spec, z, v, lam):
    """Exact minimizer of the 1-D penalized quadratic (see module docstring)."""
    if not np.isfinite(z):
        raise InputError("z must be finite")
    if lam < 0:
        raise InputError("lam must be nonnegative")
    check_threshold_preconditions(spec, v, lam)
    return float(_threshold(float(z), float(v), float(lam), spec.alpha, spec.kind, spec.a))
