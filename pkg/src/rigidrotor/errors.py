"""Exception types shared across the package."""


class RotorError(Exception):
    """Base class for all errors raised by rigidrotor."""

    code = "ROTOR_ERROR"


class SingularChartError(RotorError):
    code = "SINGULAR_CHART"


class StepTooLargeError(RotorError):
    code = "STEP_TOO_LARGE"


class UnderResolvedError(RotorError):
    code = "UNDER_RESOLVED"


class TruncationLossError(RotorError):
    code = "TRUNCATION_LOSS_EXCEEDED"


class DomainError(RotorError, ValueError):
    code = "DOMAIN"


class HbarMismatchError(RotorError, ValueError):
    code = "HBAR_MISMATCH"


class NotOnSphereError(RotorError, ValueError):
    code = "NOT_ON_SPHERE"


class ConfigError(RotorError, ValueError):
    code = "CONFIG"
