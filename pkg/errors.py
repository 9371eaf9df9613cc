"""
Error types for the resonance lab.

Library layers raise these; the application layer maps them to exit codes:
ValidationError -> 2, NumericalError -> 3, NoneFound -> 4.
"""

from typing import Optional

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_NO_HOMOCLINICS = 4


class ResonanceLabError(Exception):
    """Base error; `provenance` names the module that raised it."""

    provenance = "lab"
    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str = "", provenance: Optional[str] = None):
        super().__init__(message)
        if provenance is not None:
            self.provenance = provenance


class ValidationError(ResonanceLabError):
    exit_code = EXIT_VALIDATION


class NumericalError(ResonanceLabError):
    exit_code = EXIT_NUMERICAL


# Validation failures
class ConfigError(ValidationError):
    provenance = "cli"


class CaseMismatch(ValidationError):
    provenance = "spectral"


class OffsetTooLarge(ValidationError):
    provenance = "dynamics"


class DomainError(ValidationError):
    provenance = "numerics"


# Numerical failures
class PoleError(NumericalError):
    provenance = "numerics"


class NoConvergence(NumericalError):
    provenance = "numerics"


class DerivativeVanished(NumericalError):
    provenance = "numerics"


class ContourTooClose(NumericalError):
    provenance = "numerics"


class ResolutionError(NumericalError):
    provenance = "numerics"


class NotConverging(NumericalError):
    provenance = "numerics"


class StepFailure(NumericalError):
    provenance = "dynamics"


class NoneFound(NumericalError):
    provenance = "dynamics"
    exit_code = EXIT_NO_HOMOCLINICS


class FitResidualTooLarge(NumericalError):
    provenance = "dynamics"


class NonPositive(NumericalError):
    provenance = "dynamics"


class CountMismatch(NumericalError):
    provenance = "spectral"


class SingularMatrix(NumericalError):
    provenance = "spectral"


class TangencyWarning(UserWarning):
    """Returning curve meets the incoming manifold almost tangentially."""


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception escaping a pipeline step"""
    if isinstance(error, ResonanceLabError):
        return error.exit_code
    return EXIT_NUMERICAL
