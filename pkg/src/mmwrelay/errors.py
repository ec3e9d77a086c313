"""Exception types shared across the simulator.

Error categories map onto distinct CLI exit codes, so keep the hierarchy
flat and explicit rather than reusing bare ValueError everywhere.
"""


class ConfigError(ValueError):
    """Invalid configuration: a named invariant is violated or a key is unknown."""


class DimensionError(ValueError):
    """Array shapes are inconsistent with the configured scenario."""


class DomainError(ValueError):
    """A scalar argument is outside the domain of the formula (e.g. weight <= 0)."""


class SingularMatrixError(ArithmeticError):
    """A matrix that must be positive definite is singular or too ill-conditioned."""


class DivergenceError(ArithmeticError):
    """The alternating optimization produced a non-finite objective.

    Carries the iteration trace accumulated up to the failure for diagnosis.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
