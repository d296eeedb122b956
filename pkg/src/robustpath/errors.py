"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed data or arguments: wrong shapes, non-finite values, bad labels."""


class ConfigurationError(ValueError):
    """Inconsistent solver configuration, e.g. a penalty whose coordinate
    subproblem is not strictly convex for the given curvature."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted.  Carries the last iterate so callers can
    inspect or continue from partial results."""

    def __init__(self, message, result=None, trace=None):
        super().__init__(message)
        self.result = result
        self.trace = trace if trace is not None else getattr(result, "objective_trace", None)


class DescentViolationError(RuntimeError):
    """The surrogate failed to decrease the objective beyond tolerance.
    Indicates a broken curvature bound and is always a bug, never user error."""
