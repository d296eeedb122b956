"""Synthetic benchmark generators with reproducible contamination.

Three designs are provided: a correlated-Gaussian sparse linear model whose
responses can be corrupted by gross multiplicative outliers ("example 1"), a
linear decision boundary on the unit disk padded with noise features
("example 2"), and a quadratic boundary on the disk where squared copies of
every feature are appended so the truth is sparse in the expanded basis
("example 3").  Classification contamination flips labels.

All draws derive from an explicit seed key (seed, example, split, purpose),
so regenerating with the same SimSpec is bit-identical, and train / tune /
test streams never overlap.
"""

from dataclasses import dataclass

import numpy as np

from .data import CLASSIFICATION, REGRESSION, Dataset, dataset_from_features
from .errors import InputError

SPLIT_TRAIN, SPLIT_TUNE, SPLIT_TEST = 0, 1, 2
_PURPOSE_X, _PURPOSE_NOISE, _PURPOSE_CONTAM = 0, 1, 2

EXAMPLE1_BETA = np.array([3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0])
EXAMPLE1_BETA0 = 1.0
EXAMPLE1_NOISE_VAR = 3.0
DEFAULT_SIZES = {1: (200, 200, 200), 2: (200, 200, 10_000), 3: (1000, 1000, 10_000)}


@dataclass(frozen=True)
class SimSpec:
    example: int
    n_train: int = None
    n_tune: int = None
    n_test: int = None
    v: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.example not in (1, 2, 3):
            raise InputError("example must be 1, 2, or 3")
        if not (0 <= self.v < 100):
            raise InputError("v is a percentage in [0, 100)")
        for name in ("n_train", "n_tune", "n_test"):
            n = getattr(self, name)
            if n is None:
                object.__setattr__(self, name, DEFAULT_SIZES[self.example][
                    ("n_train", "n_tune", "n_test").index(name)])
            elif n < 1:
                raise InputError("%s must be >= 1" % name)


def _rng(*key):
    key = [int(k) for k in key]
    if any(k < 0 for k in key):
        raise InputError("seed key parts must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def replicate_seed(seed, rep):
    """Child seed for one Monte Carlo replicate of a base seed."""
    return int(np.random.SeedSequence([int(seed), int(rep)]).generate_state(1)[0])


def contaminate_multiply(responses, v, factor=1000.0, seed=0):
    """Multiply floor(v n / 100) randomly chosen responses by factor.

    Returns (contaminated, indices); indices are sorted.  Applying the same
    call twice with factor -> 1/factor restores the original responses.
    """
    responses = np.asarray(responses, dtype=np.float64)
    if not (0 <= v < 100):
        raise InputError("v is a percentage in [0, 100)")
    n = responses.shape[0]
    m = int(np.floor(v * n / 100.0))
    idx = np.sort(_rng(seed, _PURPOSE_CONTAM).choice(n, size=m, replace=False))
    out = responses.copy()
    out[idx] *= factor
    return out, idx


def flip_labels(labels, v, seed=0):
    """Flip the sign of floor(v n / 100) randomly chosen labels."""
    labels = np.asarray(labels, dtype=np.float64)
    if not np.all(np.abs(labels) == 1.0):
        raise InputError("labels must be in {-1,+1}")
    if not (0 <= v < 100):
        raise InputError("v is a percentage in [0, 100)")
    n = labels.shape[0]
    m = int(np.floor(v * n / 100.0))
    idx = np.sort(_rng(seed, _PURPOSE_CONTAM).choice(n, size=m, replace=False))
    out = labels.copy()
    out[idx] = -out[idx]
    return out, idx


def example1_covariance():
    j = np.arange(8)
    return 0.5 ** np.abs(j[:, None] - j[None, :])


def gen_example1(spec):
    """Correlated sparse linear model with optional gross response outliers.

    Returns (train, tune, test, truth).  Contamination multiplies v% of the
    train and tune responses by 1000; the test split is always clean.
    """
    if spec.example != 1:
        raise InputError("spec.example must be 1")
    cov = example1_covariance()
    L = np.linalg.cholesky(cov)
    names = ["x%d" % (j + 1) for j in range(8)]
    out = []
    truth = {
        "example": 1,
        "beta0": EXAMPLE1_BETA0,
        "beta": EXAMPLE1_BETA.tolist(),
        "cov": cov.tolist(),
        "noise_variance": EXAMPLE1_NOISE_VAR,
        "contaminated": {},
    }
    for split, n in ((SPLIT_TRAIN, spec.n_train), (SPLIT_TUNE, spec.n_tune), (SPLIT_TEST, spec.n_test)):
        g = _rng(spec.seed, 1, split, _PURPOSE_X)
        X = g.standard_normal((n, 8)) @ L.T
        eps = _rng(spec.seed, 1, split, _PURPOSE_NOISE).standard_normal(n) * np.sqrt(EXAMPLE1_NOISE_VAR)
        y = EXAMPLE1_BETA0 + X @ EXAMPLE1_BETA + eps
        if spec.v > 0 and split in (SPLIT_TRAIN, SPLIT_TUNE):
            y, idx = contaminate_multiply(y, spec.v, 1000.0, seed=_contam_seed(spec, split))
            truth["contaminated"][_split_name(split)] = idx.tolist()
        else:
            truth["contaminated"][_split_name(split)] = []
        out.append(dataset_from_features(X, y, REGRESSION, list(names)))
    return out[0], out[1], out[2], truth


def _split_name(split):
    return ("train", "tune", "test")[split]


def _contam_seed(spec, split):
    return int(np.random.SeedSequence([spec.seed, spec.example, split, _PURPOSE_CONTAM]).generate_state(1)[0])


def _disk_points(g, n):
    # Rejection-sample uniform points on the closed unit disk.
    pts = np.empty((0, 2))
    while pts.shape[0] < n:
        cand = g.uniform(-1.0, 1.0, (2 * (n - pts.shape[0]) + 8, 2))
        keep = cand[:, 0] ** 2 + cand[:, 1] ** 2 <= 1.0
        pts = np.vstack([pts, cand[keep]])
    return pts[:n]


def gen_disk(spec):
    """Disk classification benchmarks (examples 2 and 3).

    Example 2: label +1 iff x1 >= x2; features are (x1, x2) plus 18 uniform
    noise coordinates.  Example 3: label +1 iff (x1 - x2)(x1 + x2) < 0, and
    the squares of all 20 base features are appended, so only the two squared
    disk coordinates carry signal.  Label flips at rate v hit train and tune;
    the returned test split is clean.
    """
    if spec.example not in (2, 3):
        raise InputError("spec.example must be 2 or 3")
    names = ["x%d" % (j + 1) for j in range(20)]
    if spec.example == 3:
        names = names + ["x%dsq" % (j + 1) for j in range(20)]
    out = []
    truth = {
        "example": spec.example,
        "relevant": [1, 2] if spec.example == 2 else [21, 22],
        "rule": "x1 >= x2" if spec.example == 2 else "(x1 - x2)(x1 + x2) < 0",
        "contaminated": {},
    }
    for split, n in ((SPLIT_TRAIN, spec.n_train), (SPLIT_TUNE, spec.n_tune), (SPLIT_TEST, spec.n_test)):
        g = _rng(spec.seed, spec.example, split, _PURPOSE_X)
        disk = _disk_points(g, n)
        noise = _rng(spec.seed, spec.example, split, _PURPOSE_NOISE).uniform(-1.0, 1.0, (n, 18))
        F = np.hstack([disk, noise])
        if spec.example == 2:
            y = np.where(F[:, 0] >= F[:, 1], 1.0, -1.0)
        else:
            y = np.where((F[:, 0] - F[:, 1]) * (F[:, 0] + F[:, 1]) < 0.0, 1.0, -1.0)
            F = np.hstack([F, F * F])
        if spec.v > 0 and split in (SPLIT_TRAIN, SPLIT_TUNE):
            y, idx = flip_labels(y, spec.v, seed=_contam_seed(spec, split))
            truth["contaminated"][_split_name(split)] = idx.tolist()
        else:
            truth["contaminated"][_split_name(split)] = []
        out.append(dataset_from_features(F, y, CLASSIFICATION, list(names)))
    return out[0], out[1], out[2], truth


def generate(spec):
    """Dispatch on spec.example."""
    return gen_example1(spec) if spec.example == 1 else gen_disk(spec)


def example1_mse(truth, phi):
    """Population prediction error of phi against the generating model.

    For x ~ N(0, Sigma) the mean squared excess error of (b0, b) over the
    truth is d' blockdiag(1, Sigma) d with d the coefficient difference, so
    no test sample is needed.
    """
    phi = np.asarray(phi, dtype=np.float64)
    cov = np.asarray(truth["cov"], dtype=np.float64)
    target = np.concatenate([[truth["beta0"]], np.asarray(truth["beta"], dtype=np.float64)])
    if phi.shape != target.shape:
        raise InputError("phi has shape %r, expected %r" % (phi.shape, target.shape))
    d = phi - target
    tilde = np.zeros((cov.shape[0] + 1, cov.shape[0] + 1))
    tilde[0, 0] = 1.0
    tilde[1:, 1:] = cov
    return float(d @ tilde @ d)
