"""
Root Finding Module
Newton iteration for analytic functions and argument-principle zero counting
on rectangular contours
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from errors import (
    ContourTooClose,
    DerivativeVanished,
    DomainError,
    NoConvergence,
    ResolutionError,
)

logger = logging.getLogger(__name__)

ComplexFunction = Callable[[complex], complex]

COMPLEX_STEP = 1e-20
CAUCHY_NODES = 16
DERIVATIVE_FLOOR = 1e-300


@dataclass(frozen=True)
class ContourWindow:
    """Axis-aligned rectangle center + [-w, w] + i[-low, high]"""

    center: complex
    half_width_re: float
    half_width_im_low: float
    half_width_im_high: float

    def __post_init__(self):
        widths = (self.half_width_re, self.half_width_im_low, self.half_width_im_high)
        if not all(np.isfinite(w) and w > 0 for w in widths):
            raise DomainError(f"window half-widths must be positive, got {widths}")
        if not np.isfinite(complex(self.center)):
            raise DomainError("window center must be finite")

    @property
    def re_min(self) -> float:
        return complex(self.center).real - self.half_width_re

    @property
    def re_max(self) -> float:
        return complex(self.center).real + self.half_width_re

    @property
    def im_min(self) -> float:
        return complex(self.center).imag - self.half_width_im_low

    @property
    def im_max(self) -> float:
        return complex(self.center).imag + self.half_width_im_high

    @classmethod
    def from_bounds(cls, re_min: float, re_max: float, im_min: float, im_max: float) -> 'ContourWindow':
        center_re = 0.5 * (re_min + re_max)
        center_im = 0.5 * (im_min + im_max)
        half_im = 0.5 * (im_max - im_min)
        return cls(complex(center_re, center_im), 0.5 * (re_max - re_min), half_im, half_im)

    def contains(self, z: complex) -> bool:
        return (self.re_min <= z.real <= self.re_max) and (self.im_min <= z.imag <= self.im_max)

    def shrunk(self, factor: float) -> 'ContourWindow':
        """Same center, every half-width multiplied by (1 - factor)"""
        scale = 1.0 - factor
        return ContourWindow(self.center, self.half_width_re * scale,
                             self.half_width_im_low * scale, self.half_width_im_high * scale)

    def boundary(self, samples_per_side: int) -> np.ndarray:
        """Counterclockwise boundary samples, closed (last point equals first)"""
        n = int(samples_per_side)
        corners = [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]
        fractions = np.arange(n) / n
        edges = []
        for k in range(4):
            start, end = corners[k], corners[(k + 1) % 4]
            edges.append(start + (end - start) * fractions)
        points = np.concatenate(edges)
        return np.append(points, points[0])


@dataclass(frozen=True)
class NewtonResult:
    root: complex
    iterations: int
    residual: float


@dataclass(frozen=True)
class ZeroCount:
    count: int
    min_abs: float
    max_phase_step: float
    samples_per_side: int


def complex_step_derivative(f: ComplexFunction, x: float) -> float:
    """Derivative of a real-analytic f at real x without subtractive cancellation"""
    return f(complex(x, COMPLEX_STEP)).imag / COMPLEX_STEP


def cauchy_derivative(f: ComplexFunction, z: complex, radius: Optional[float] = None) -> complex:
    """Contour-averaged derivative of a holomorphic f on a small circle around z"""
    if radius is None:
        radius = 1e-6 * max(1.0, abs(z))
    angles = 2.0 * np.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
    nodes = np.exp(1j * angles)
    values = np.array([f(z + radius * node) for node in nodes], dtype=np.complex128)
    return complex(np.mean(values / nodes) / radius)


def _derivative(f: ComplexFunction, z: complex, fz: complex) -> complex:
    if z.imag == 0 and complex(fz).imag == 0:
        return complex(complex_step_derivative(f, z.real))
    return cauchy_derivative(f, z)


def newton_root(f: ComplexFunction, seed: complex, tol: float = 1e-12, max_iter: int = 50,
                fprime: Optional[ComplexFunction] = None) -> NewtonResult:
    """
    Newton iteration z <- z - f(z)/f'(z) until |f(z)| < tol

    The derivative is analytic when `fprime` is given; otherwise complex-step
    for real-analytic problems on the real axis, else a Cauchy contour average.
    """
    if tol <= 0:
        raise DomainError("Newton tolerance must be positive")

    z = complex(seed)
    for iteration in range(max_iter + 1):
        fz = complex(f(z))
        residual = abs(fz)
        if residual < tol:
            logger.debug(f"Newton converged to {z} in {iteration} iterations (|f|={residual:.3e})")
            return NewtonResult(root=z, iterations=iteration, residual=residual)
        if iteration == max_iter:
            break

        dfz = complex(fprime(z)) if fprime is not None else _derivative(f, z, fz)
        if abs(dfz) < DERIVATIVE_FLOOR or not np.isfinite(dfz):
            raise DerivativeVanished(f"derivative vanished at iterate {z}")
        z = z - fz / dfz
        if not np.isfinite(z):
            break

    raise NoConvergence(f"Newton did not converge from seed {seed} within {max_iter} iterations")


def _evaluate_on(f: Callable, points: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(f(points), dtype=np.complex128)
        if values.shape == points.shape:
            return values
    except (TypeError, ValueError):
        pass
    return np.array([complex(f(p)) for p in points], dtype=np.complex128)


def count_zeros_detailed(f: Callable, window: ContourWindow, samples_per_side: int,
                         threshold: float = 1e-10) -> ZeroCount:
    """Winding number of f along the window boundary, with sampling diagnostics"""
    points = window.boundary(samples_per_side)
    values = _evaluate_on(f, points)

    min_abs = float(np.min(np.abs(values)))
    if not np.isfinite(min_abs) or min_abs < threshold:
        raise ContourTooClose(f"|f| = {min_abs:.3e} on the contour is below {threshold:.1e}")

    steps = np.angle(values[1:] / values[:-1])
    max_step = float(np.max(np.abs(steps)))
    if max_step > np.pi / 2:
        raise ResolutionError(
            f"phase step {max_step:.3f} exceeds π/2 at {samples_per_side} samples per side"
        )

    winding = float(np.sum(steps)) / (2.0 * np.pi)
    return ZeroCount(count=int(round(winding)), min_abs=min_abs,
                     max_phase_step=max_step, samples_per_side=int(samples_per_side))


def count_zeros(f: Callable, window: ContourWindow, samples_per_side: int,
                threshold: float = 1e-10) -> int:
    """Number of zeros of f inside the window (argument principle)"""
    return count_zeros_detailed(f, window, samples_per_side, threshold).count


def count_zeros_adaptive(f: Callable, window: ContourWindow, samples_per_side: int = 256,
                         max_samples_per_side: int = 32768, threshold: float = 1e-10) -> ZeroCount:
    """Doubles the sampling on ResolutionError until the phase is resolved"""
    samples = int(samples_per_side)
    while True:
        try:
            return count_zeros_detailed(f, window, samples, threshold)
        except ResolutionError:
            if samples * 2 > max_samples_per_side:
                raise
            samples *= 2
            logger.debug(f"Refining contour sampling to {samples} per side")
