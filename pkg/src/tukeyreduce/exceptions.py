"""Exception types shared across the package.

Parameter/shape/domain problems are ValueErrors; algorithmic failures
(non-convergence, stagnation) are RuntimeErrors carrying diagnostics.
"""


class ParameterError(ValueError):
    """An argument is outside its documented range."""


class DomainError(ValueError):
    """Numeric input contains NaN/inf or is otherwise out of domain."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent."""


class WeightInvariantError(ValueError):
    """A weight vector violates its contract (support values >= 1, max <= n^2)."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to reach tolerance within its budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class StagnationError(RuntimeError):
    """Row sampling failed to shrink the support for several consecutive steps.

    Carries the last valid weight vector so callers can still use it.
    """

    def __init__(self, message, weights=None, history=None):
        super().__init__(message)
        self.weights = weights
        self.history = history or []


class FlatStartError(RuntimeError):
    """Every restart of the solver started and stayed in the flat region."""
