"""
Numerics Module
Special functions and complex-analysis utilities shared by dynamics and spectral
"""

from .special_functions import (
    complex_pow,
    digamma_complex,
    gamma_complex,
    log_gamma_complex,
    principal_log,
)
from .root_finding import (
    ContourWindow,
    NewtonResult,
    ZeroCount,
    count_zeros,
    count_zeros_adaptive,
    count_zeros_detailed,
    newton_root,
)
from .extrapolation import ExtrapolationResult, limit_extrapolate

__all__ = [
    'complex_pow', 'digamma_complex', 'gamma_complex', 'log_gamma_complex', 'principal_log',
    'ContourWindow', 'NewtonResult', 'ZeroCount',
    'count_zeros', 'count_zeros_adaptive', 'count_zeros_detailed', 'newton_root',
    'ExtrapolationResult', 'limit_extrapolate',
]
