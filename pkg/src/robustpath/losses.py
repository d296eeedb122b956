"""Loss families and their quadratic-majorization ingredients.

Seven families are supported.  Three are convex: squared error ("ls"), Huber
("huber", shape = transition point delta), and scaled logistic deviance
("logistic").  Four are bounded and nonconvex: a Gaussian-kernel regression
loss ("clossr"), its margin-based classification analogue ("closs"), a
generalized exponential margin loss ("gloss", shape sigma > 1), and a normal
survival margin loss ("qloss").

Regression losses act on residuals u = y - f; classification losses act on
margins u = y * f with labels in {-1, +1}.  Every family exposes:

  * loss_value / loss_grad       Gamma(u) and Gamma'(u), vectorized in u
  * curvature_bound              a global upper bound B >= sup Gamma''
  * working_response             the shifted response h such that one weighted
                                 least-squares step on (X, h) with weight B
                                 decreases the empirical loss

The curvature bounds are exact suprema in closed form, so the quadratic
surrogate

    Gamma(z) + Gamma'(z) (u - z) + (B / 2) (u - z)^2

majorizes Gamma everywhere and touches it at u = z.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, ndtr

from .data import CLASSIFICATION, REGRESSION
from .errors import InputError

LN2 = float(np.log(2.0))

FAMILIES = ("ls", "huber", "logistic", "clossr", "closs", "gloss", "qloss")
CONVEX_FAMILIES = ("ls", "huber", "logistic")
REGRESSION_FAMILIES = ("ls", "huber", "clossr")

# Shape defaults, chosen to behave sensibly on unit-scale data.
DEFAULT_SIGMA = {"huber": 1.345, "clossr": 1.0, "closs": 0.9, "gloss": 1.1, "qloss": 0.2}


@dataclass(frozen=True)
class LossSpec:
    """Resolved loss family: name, shape parameter, and task."""

    family: str
    sigma: float
    task: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError("unknown loss family %r; choose from %r" % (self.family, FAMILIES))
        if self.family in DEFAULT_SIGMA:
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise InputError("loss %r needs a positive shape, got %r" % (self.family, self.sigma))
            if self.family == "gloss" and self.sigma <= 1.0:
                raise InputError("gloss needs sigma > 1, got %r" % (self.sigma,))
        expected = REGRESSION if self.family in REGRESSION_FAMILIES else CLASSIFICATION
        if self.task != expected:
            raise InputError("loss %r is a %s loss" % (self.family, expected))

    @property
    def convex(self):
        return self.family in CONVEX_FAMILIES


def loss_spec(family, sigma=None):
    """Look up a loss family by (case-insensitive) name.

    sigma defaults per family; it is ignored by "ls" and "logistic".
    """
    family = str(family).lower()
    if family not in FAMILIES:
        raise InputError("unknown loss family %r; choose from %r" % (family, FAMILIES))
    if sigma is None:
        sigma = DEFAULT_SIGMA.get(family, 1.0)
    task = REGRESSION if family in REGRESSION_FAMILIES else CLASSIFICATION
    return LossSpec(family, float(sigma), task)


def _check_finite(u):
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise InputError("loss argument contains non-finite values")
    return u


def _closs_scale(sigma):
    # Normalizer making the loss hit 1 at margin 0.
    return 1.0 / (1.0 - np.exp(-1.0 / (2.0 * sigma * sigma)))


def loss_value(spec, u):
    """Gamma(u) for residuals (regression) or margins (classification)."""
    u = _check_finite(u)
    s = spec.sigma
    f = spec.family
    if f == "ls":
        out = u * u
    elif f == "huber":
        au = np.abs(u)
        out = np.where(au <= s, 0.5 * u * u, s * au - 0.5 * s * s)
    elif f == "logistic":
        out = np.logaddexp(0.0, -u) / LN2
    elif f == "clossr":
        out = 1.0 - np.exp(-u * u / (2.0 * s * s))
    elif f == "closs":
        t = 1.0 - u
        out = _closs_scale(s) * (1.0 - np.exp(-t * t / (2.0 * s * s)))
    elif f == "gloss":
        # 2^sigma (1 + e^u)^(-sigma), computed in the log domain for large |u|
        out = np.exp(s * (LN2 - np.logaddexp(0.0, u)))
    else:  # qloss
        out = 2.0 * ndtr(-u / s)
    return float(out) if np.isscalar(u) or out.ndim == 0 else out


def loss_grad(spec, u):
    """Gamma'(u), vectorized like loss_value."""
    u = _check_finite(u)
    s = spec.sigma
    f = spec.family
    if f == "ls":
        out = 2.0 * u
    elif f == "huber":
        out = np.clip(u, -s, s)
    elif f == "logistic":
        out = -expit(-u) / LN2
    elif f == "clossr":
        out = (u / (s * s)) * np.exp(-u * u / (2.0 * s * s))
    elif f == "closs":
        t = 1.0 - u
        out = -_closs_scale(s) * (t / (s * s)) * np.exp(-t * t / (2.0 * s * s))
    elif f == "gloss":
        out = -s * np.exp(s * (LN2 - np.logaddexp(0.0, u))) * expit(u)
    else:  # qloss
        out = -np.sqrt(2.0 / np.pi) / s * np.exp(-u * u / (2.0 * s * s))
    return float(out) if np.isscalar(u) or out.ndim == 0 else out


@dataclass(frozen=True)
class CurvatureBound:
    """Global curvature bound B >= sup_u Gamma''(u)."""

    B: float


@lru_cache(maxsize=256)
def _bound(spec):
    s = spec.sigma
    f = spec.family
    if f == "ls":
        return 2.0
    if f == "huber":
        return 1.0
    if f == "logistic":
        return 1.0 / (4.0 * LN2)
    if f == "clossr":
        # Gamma''(u) = (1/s^2)(1 - u^2/s^2) exp(-u^2 / 2 s^2), maximal at u = 0.
        return 1.0 / (s * s)
    if f == "closs":
        return _closs_scale(s) / (s * s)
    if f == "gloss":
        # In t = e^u, Gamma'' = s 2^s t (s t - 1)(1 + t)^(-s-2); its positive
        # branch has a single stationary point at the larger root of
        # s^2 t^2 - (3 s + 1) t - 1... solved via the quadratic below.
        t = ((3.0 * s + 1.0) + np.sqrt(5.0 * s * s + 6.0 * s + 1.0)) / (2.0 * s * s)
        return float(s * 2.0**s * t * (s * t - 1.0) * (1.0 + t) ** (-(s + 2.0)))
    # qloss: Gamma''(u) = (2/s^2) x phi(x) at x = u/s, maximal at x = 1.
    return 2.0 * np.exp(-0.5) / np.sqrt(2.0 * np.pi) / (s * s)


def curvature_bound(spec):
    """Closed-form global bound on Gamma''. Cached per (family, sigma)."""
    return CurvatureBound(_bound(spec))


def working_response(spec, y, z, B=None):
    """Shifted response for the weighted least-squares surrogate.

    z is the current linear predictor X phi.  For regression,
    h = z + Gamma'(y - z) / B; for classification, h = z - y Gamma'(y z) / B.
    Minimizing (B / 2n) sum (h - x' phi)^2 then decreases the empirical loss.
    """
    y = _check_finite(y)
    z = _check_finite(z)
    if y.shape != z.shape:
        raise InputError("y and z must have matching shapes")
    if B is None:
        B = _bound(spec)
    if spec.task == REGRESSION:
        return z + loss_grad(spec, y - z) / B
    if not np.all(np.abs(y) == 1.0):
        raise InputError("classification labels must be in {-1,+1}")
    return z - y * loss_grad(spec, y * z) / B


def margins(spec, y, f):
    """Residuals y - f (regression) or margins y * f (classification)."""
    return y - f if spec.task == REGRESSION else y * f


def prediction_gradient(spec, y, f):
    """d Gamma(u(f)) / d f per row: -Gamma'(y - f) or y Gamma'(y f)."""
    u = margins(spec, y, f)
    g = loss_grad(spec, u)
    return -g if spec.task == REGRESSION else y * g


def empirical_loss(spec, data, phi):
    """Mean loss (1/n) sum Gamma(u_i) at coefficients phi."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (data.X.shape[1],):
        raise InputError(
            "phi has shape %r for design with %d columns" % (phi.shape, data.X.shape[1])
        )
    if data.task != spec.task:
        raise InputError("loss task %r does not match data task %r" % (spec.task, data.task))
    f = data.X @ phi
    return float(np.mean(loss_value(spec, margins(spec, data.y, f))))
