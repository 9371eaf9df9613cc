"""
Special Functions Module
Complex Gamma function and principal-branch powers used by the spectral layer
"""

import logging
from typing import Union

import numpy as np
from scipy import special

from errors import DomainError, NumericalError, PoleError

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]

# Lanczos coefficients, g = 7, n = 9
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
HALF_LOG_TWO_PI = 0.5 * np.log(2.0 * np.pi)
POLE_TOLERANCE = 1e-12


def _as_complex_array(value: ComplexLike) -> np.ndarray:
    return np.asarray(value, dtype=np.complex128)


def _restore_shape(result: np.ndarray, original: ComplexLike):
    if np.ndim(original) == 0:
        return complex(result)
    return result


def _check_poles(s: np.ndarray) -> None:
    nearest = np.round(s.real)
    at_pole = (
        (np.abs(s.imag) <= POLE_TOLERANCE)
        & (np.abs(s.real - nearest) <= POLE_TOLERANCE)
        & (nearest <= 0)
    )
    if np.any(at_pole):
        bad = s[at_pole].ravel()[0]
        raise PoleError(f"Gamma argument {bad} is at a pole")


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{what} produced a non-finite value", provenance="numerics")


def _lanczos_log_gamma(s: np.ndarray) -> np.ndarray:
    """Log-form Lanczos sum, valid for Re s >= 1/2"""
    z = s - 1.0
    series = np.full(z.shape, LANCZOS_COEFFICIENTS[0], dtype=np.complex128)
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series = series + coefficient / (z + i)
    t = z + LANCZOS_G + 0.5
    return HALF_LOG_TWO_PI + (z + 0.5) * np.log(t) - t + np.log(series)


def gamma_complex(s: ComplexLike) -> ComplexLike:
    """
    Gamma function for complex arguments (scalar or array)

    Lanczos approximation on Re s >= 1/2, reflection formula
    Γ(s)Γ(1-s) = π / sin(πs) on the left half-plane.
    """
    values = _as_complex_array(s)
    _check_poles(values)

    reflect = values.real < 0.5
    mirrored = np.where(reflect, 1.0 - values, values)
    with np.errstate(over='ignore', invalid='ignore'):
        direct = np.exp(_lanczos_log_gamma(mirrored))
        result = np.where(reflect, np.pi / (np.sin(np.pi * values) * direct), direct)

    _check_finite(result, "gamma_complex")
    return _restore_shape(result, s)


def log_gamma_complex(s: ComplexLike) -> ComplexLike:
    """Continuous-branch log Γ (branch cut on the negative real axis only)"""
    values = _as_complex_array(s)
    _check_poles(values)
    result = special.loggamma(values)
    _check_finite(result, "log_gamma_complex")
    return _restore_shape(result, s)


def digamma_complex(s: ComplexLike) -> ComplexLike:
    values = _as_complex_array(s)
    _check_poles(values)
    result = special.psi(values)
    _check_finite(result, "digamma_complex")
    return _restore_shape(result, s)


def principal_log(base: ComplexLike) -> ComplexLike:
    """ln|b| + i Arg b with Arg in (-π, π]"""
    values = _as_complex_array(base)
    if np.any(values == 0):
        raise DomainError("logarithm of zero")
    argument = np.angle(values)
    argument = np.where(argument == -np.pi, np.pi, argument)
    result = np.log(np.abs(values)) + 1j * argument
    return _restore_shape(result, base)


def complex_pow(base: ComplexLike, exponent: ComplexLike) -> ComplexLike:
    """
    Principal-branch power exp(p · (ln|b| + i Arg b)), Arg b in (-π, π]

    A zero base is accepted only with a real positive exponent (result 0).
    """
    b = _as_complex_array(base)
    p = _as_complex_array(exponent)
    b, p = np.broadcast_arrays(b, p)

    zero_base = b == 0
    if np.any(zero_base):
        allowed = (p.imag == 0) & (p.real > 0)
        if not np.all(allowed[zero_base]):
            raise DomainError("zero base requires a real positive exponent")

    safe_base = np.where(zero_base, 1.0 + 0j, b)
    log_base = _as_complex_array(principal_log(safe_base))
    with np.errstate(over='ignore', invalid='ignore'):
        result = np.where(zero_base, 0j, np.exp(p * log_base))

    _check_finite(result, "complex_pow")
    if np.ndim(base) == 0 and np.ndim(exponent) == 0:
        return complex(result)
    return result
