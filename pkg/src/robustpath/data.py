"""Dataset container used by every solver entry point.

The design matrix always carries an explicit leading column of ones.  Models
that exclude the intercept simply pin that coefficient at zero, so coefficient
vectors have length p + 1 everywhere and index 0 is always the intercept.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

REGRESSION = "regression"
CLASSIFICATION = "classification"

TASKS = (REGRESSION, CLASSIFICATION)


@dataclass
class Dataset:
    """Rows of (x_i, y_i) with an intercept column baked into X.

    Arguments
    ---------
    X : ndarray of shape (n, p + 1)
        Design matrix; column 0 must be identically 1.
    y : ndarray of shape (n,)
        Responses.  For classification these must be in {-1, +1}.
    task : str
        Either "regression" or "classification".
    feature_names : list of str, optional
        Names for the p non-intercept columns, used by file output.
    """

    X: np.ndarray
    y: np.ndarray
    task: str
    feature_names: list = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise InputError("X must be 2-D, got shape %r" % (self.X.shape,))
        if self.y.ndim != 1 or self.y.shape[0] != self.X.shape[0]:
            raise InputError(
                "y must be 1-D with one entry per row of X; got y%r vs X%r"
                % (self.y.shape, self.X.shape)
            )
        if self.X.shape[1] < 1:
            raise InputError("X needs at least the intercept column")
        if not np.all(np.isfinite(self.X)):
            raise InputError("X contains non-finite entries")
        if not np.all(np.isfinite(self.y)):
            raise InputError("y contains non-finite entries")
        if not np.all(self.X[:, 0] == 1.0):
            raise InputError("column 0 of X must be identically 1 (intercept)")
        if self.task not in TASKS:
            raise InputError("task must be one of %r, got %r" % (TASKS, self.task))
        if self.task == CLASSIFICATION:
            labs = np.unique(self.y)
            if not np.all(np.isin(labs, (-1.0, 1.0))):
                raise InputError(
                    "classification responses must be in {-1,+1}; got values %r"
                    % (labs[:6].tolist(),)
                )
        if self.feature_names is not None and len(self.feature_names) != self.p:
            raise InputError(
                "feature_names has %d entries for %d predictors"
                % (len(self.feature_names), self.p)
            )

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1] - 1


def dataset_from_features(features, y, task, feature_names=None):
    """Build a Dataset by prepending the intercept column to raw features."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    ones = np.ones((features.shape[0], 1))
    return Dataset(np.hstack([ones, features]), y, task, feature_names)


def map_binary_labels(y):
    """Map {0,1} responses to {-1,+1}; responses already in {-1,+1} pass through.

    Returns (mapped, was_mapped).  Anything else raises InputError.
    """
    y = np.asarray(y, dtype=np.float64)
    vals = np.unique(y)
    if np.all(np.isin(vals, (-1.0, 1.0))):
        return y, False
    if np.all(np.isin(vals, (0.0, 1.0))):
        return np.where(y == 0.0, -1.0, 1.0), True
    raise InputError(
        "labels must be in {-1,+1} or {0,1}; got values %r" % (vals[:6].tolist(),)
    )
