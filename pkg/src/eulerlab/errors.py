"""Exception types shared across the package."""


class EulerLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EulerLabError):
    """Evaluation outside the admissible domain (r <= 0, t >= t_star, ...)."""


class ParamError(EulerLabError):
    """Invalid solution-family parameters."""


class VariantError(EulerLabError):
    """Operation not defined for the requested solution variant."""


class VariantMismatch(VariantError):
    """Equation not applicable to the given variant."""


class MissingField(EulerLabError):
    """A symbolic operator was not handed a field role it needs."""


class UnsupportedForm(EulerLabError):
    """Expression outside the supported monomial fragment."""


class StepError(EulerLabError):
    """Trajectory integration would leave the admissible domain."""


class CFLViolation(EulerLabError):
    """Advection time step fell below the sanity floor."""


class NoConvergence(EulerLabError):
    """Iterative elliptic solve exhausted its iteration budget."""

    def __init__(self, message, last_residual=None, iterations=None):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations


class DegenerateFit(EulerLabError):
    """Fit abscissa has no spread, slope is undetermined."""


class ConfigError(EulerLabError):
    """Invalid run configuration, config file, or CLI flag combination."""
