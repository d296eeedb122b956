"""Sparse regression and classification with bounded robust losses.

Every loss here admits a quadratic upper bound with fixed curvature, so a
penalized fit reduces to a sequence of penalized weighted least squares
problems solved by coordinate descent.  The same machinery covers plain
convex losses (squared error, Huber, logistic) and the bounded ones that
cap the influence of contaminated observations.
"""

__version__ = "0.1.0"

from .data import (
    CLASSIFICATION,
    REGRESSION,
    Dataset,
    dataset_from_features,
    map_binary_labels,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DescentViolationError,
    InputError,
)
from .losses import (
    CONVEX_FAMILIES,
    DEFAULT_SIGMA,
    FAMILIES,
    REGRESSION_FAMILIES,
    CurvatureBound,
    LossSpec,
    curvature_bound,
    empirical_loss,
    loss_grad,
    loss_spec,
    loss_value,
    working_response,
)
from .penalties import (
    DEFAULT_A,
    PENALTIES,
    PenaltySpec,
    penalty_deriv,
    penalty_spec,
    penalty_total,
    penalty_value,
    threshold_update,
)
from .cd import CdConfig, PwlsProblem, pwls_objective, solve_pwls
from .mm import (
    FitConfig,
    FitResult,
    fit,
    fit_unpenalized,
    intercept_only_fit,
    penalized_objective,
)
from .paths import (
    METRICS,
    PathConfig,
    PathResult,
    cross_validate,
    evaluate_metric,
    lambda_grid,
    lambda_max,
    select_lambda,
    solution_path,
)
from .diagnostics import (
    KktReport,
    ProbeResult,
    dini_stationarity_probe,
    fd_gradient_check,
    kkt_residual,
    majorization_audit,
)
from .datagen import (
    SimSpec,
    contaminate_multiply,
    example1_mse,
    flip_labels,
    generate,
    replicate_seed,
)

__all__ = [
    "__version__",
    "CLASSIFICATION",
    "REGRESSION",
    "Dataset",
    "dataset_from_features",
    "map_binary_labels",
    "ConfigurationError",
    "ConvergenceError",
    "DescentViolationError",
    "InputError",
    "CONVEX_FAMILIES",
    "DEFAULT_SIGMA",
    "FAMILIES",
    "REGRESSION_FAMILIES",
    "CurvatureBound",
    "LossSpec",
    "curvature_bound",
    "empirical_loss",
    "loss_grad",
    "loss_spec",
    "loss_value",
    "working_response",
    "DEFAULT_A",
    "PENALTIES",
    "PenaltySpec",
    "penalty_deriv",
    "penalty_spec",
    "penalty_total",
    "penalty_value",
    "threshold_update",
    "CdConfig",
    "PwlsProblem",
    "pwls_objective",
    "solve_pwls",
    "FitConfig",
    "FitResult",
    "fit",
    "fit_unpenalized",
    "intercept_only_fit",
    "penalized_objective",
    "METRICS",
    "PathConfig",
    "PathResult",
    "cross_validate",
    "evaluate_metric",
    "lambda_grid",
    "lambda_max",
    "select_lambda",
    "solution_path",
    "KktReport",
    "ProbeResult",
    "dini_stationarity_probe",
    "fd_gradient_check",
    "kkt_residual",
    "majorization_audit",
    "SimSpec",
    "contaminate_multiply",
    "example1_mse",
    "flip_labels",
    "generate",
    "replicate_seed",
]
