"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class KSDError(Exception):
    exit_code = 1


class InputError(KSDError, ValueError):
    """Malformed arguments: wrong shapes, out-of-range indices, empty samples."""

    exit_code = 3


class ModelError(KSDError, ValueError):
    """A distribution or model violates its invariants (e.g. non-SPD covariance)."""

    exit_code = 4


class ConvergenceError(KSDError, RuntimeError):
    """Adaptive quadrature ran out of subdivisions before reaching its tolerance."""

    exit_code = 5

    def __init__(self, message, estimate=float("nan"), error_bound=float("inf")):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class DegeneracyError(ModelError):
    """A perturbation direction is identically zero on the support of p0."""

    exit_code = 6


class NegativityError(ModelError):
    """A perturbed probability vector would have a negative entry."""

    exit_code = 7
