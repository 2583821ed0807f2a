"""Exception taxonomy shared across the package."""


class TrialkitError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDensity(TrialkitError, ValueError):
    """Density vanishes (or the CDF fails to increase) where positive mass is required."""


class UnsupportedSupport(TrialkitError, ValueError):
    """Operation undefined for this support, e.g. a horizon check with support_lo = 0."""


class IrregularDistribution(TrialkitError, ValueError):
    """The hazard-adjusted value v - (1 - F(v))/f(v) is not nondecreasing."""


class WeightOutOfRange(TrialkitError, ValueError):
    """Low-type weight outside the admissible range for the requested solver."""


class BudgetExceeded(TrialkitError):
    """Requested enumeration is larger than the configured candidate budget."""


class PreconditionFailed(TrialkitError, ValueError):
    """A parameter inequality required by the requested mechanism family fails."""


class UseFiniteHorizon(TrialkitError, ValueError):
    """Discount rate r <= 0: the finite-horizon solver applies instead."""


class DegenerateSet(TrialkitError, ValueError):
    """Fewer than two distinct points: no lower envelope exists."""


class BracketingError(TrialkitError, ArithmeticError):
    """Root finder could not bracket a sign change."""


class ConfigError(TrialkitError, ValueError):
    """Run configuration failed validation.

    ``reason`` is a stable machine-readable slug, e.g. ``"missing_field:model.mu0"``.
    """

    def __init__(self, reason: str, message: str | None = None):
        super().__init__(message or reason)
        self.reason = reason
