"""
Quantization Matrix Module
The function μ(τ, h), the rescaled parameter S(z, h), the homoclinic
quantization matrices 𝒬 and 𝒬̃ and the scalar pseudo-resonance condition
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from dynamics.invariants import HomoclinicDatum
from errors import DomainError, ValidationError
from numerics.special_functions import complex_pow, gamma_complex

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def action_phase(action: float, h: float) -> Tuple[int, float]:
    """
    A/h split as 2πn + θ with θ in [0, 2π)

    Every e^{iA/h} factor is evaluated as e^{iθ}; n feeds the lattice index.
    """
    turns = int(np.floor(action / (TWO_PI * h)))
    theta = action / h - TWO_PI * turns
    return turns, float(theta)


@dataclass(frozen=True)
class QuantizationInput:
    """Homoclinic invariants plus the hyperbolic constants at the barrier top"""

    data: Tuple[HomoclinicDatum, ...]
    lambda1: float
    lambda2: float
    E0: float
    source: str = 'synthetic'
    perturbed_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'data', tuple(self.data))

    @property
    def K(self) -> int:
        return len(self.data)

    @property
    def perturbed(self) -> HomoclinicDatum:
        return self.data[self.perturbed_index - 1]

    @property
    def w(self) -> float:
        return self.perturbed.w_integral

    @property
    def D0(self) -> float:
        return 0.5 * self.lambda2

    def with_w(self, w_integral: float) -> 'QuantizationInput':
        data = list(self.data)
        data[self.perturbed_index - 1] = self.perturbed.with_w(w_integral)
        return replace(self, data=tuple(data))

    def problems(self, require_pair: bool = True) -> List[str]:
        issues = []
        if not (0 < self.lambda1 < self.lambda2):
            issues.append(f"need 0 < λ1 < λ2, got λ1={self.lambda1}, λ2={self.lambda2}")
        if self.E0 <= 0:
            issues.append(f"E0 must be positive, got {self.E0}")
        if require_pair and self.K < 2:
            issues.append(f"at least two homoclinic trajectories are needed, got K={self.K}")
        if not 1 <= self.perturbed_index <= self.K:
            issues.append(f"perturbed_index {self.perturbed_index} outside 1..{self.K}")
            return issues
        for datum in self.data:
            issues.extend(datum.problems())
            if datum.index != self.perturbed_index and datum.w_integral != 0:
                issues.append(f"γ{datum.index} carries w={datum.w_integral} but only "
                              f"γ{self.perturbed_index} may be perturbed")
        return issues

    def validate(self, require_pair: bool = True) -> 'QuantizationInput':
        issues = self.problems(require_pair)
        if issues:
            raise ValidationError("; ".join(issues), provenance="spectral")
        return self


@dataclass(frozen=True)
class RescaledParameter:
    value: complex
    z: complex
    h: float

    def recompute(self, lambda1: float, lambda2: float, E0: float) -> complex:
        return rescaled_S(self.z, self.h, lambda1, lambda2, E0).value


@dataclass(frozen=True, eq=False)
class QuantizationMatrix:
    """Rank-one K×K matrix, entries = scale · row_factor[k] · col_factor[l]"""

    entries: np.ndarray
    z: complex
    h: float
    perturbed: bool = False
    delta: Optional[float] = None
    row_factor: np.ndarray = field(default=None, repr=False)
    col_factor: np.ndarray = field(default=None, repr=False)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def norm(self) -> float:
        return float(linalg.norm(self.entries, 2))

    def max_minor_ratio(self) -> float:
        """Largest 2×2 minor relative to the largest entry squared"""
        q = self.entries
        scale = float(np.max(np.abs(q))) ** 2
        k = q.shape[0]
        worst = 0.0
        for i in range(k):
            for j in range(i + 1, k):
                for a in range(k):
                    for b in range(a + 1, k):
                        minor = q[i, a] * q[j, b] - q[i, b] * q[j, a]
                        worst = max(worst, abs(minor))
        return worst / scale

    def nilpotency_ratio(self) -> float:
        """‖𝒬²‖ / ‖𝒬‖²"""
        square = self.entries @ self.entries
        return float(linalg.norm(square, 2) / self.norm() ** 2)


def rescaled_S(z: complex, h: float, lambda1: float, lambda2: float, E0: float) -> RescaledParameter:
    """S(z, h) = (λ1+λ2)/2 - i(z - E0)/h"""
    if not 0 < h <= 1:
        raise DomainError(f"h must lie in (0, 1], got {h}")
    value = 0.5 * (lambda1 + lambda2) - 1j * (complex(z) - E0) / h
    return RescaledParameter(value=complex(value), z=complex(z), h=float(h))


def _gamma_mu_prefactor(inp: QuantizationInput, tau: np.ndarray) -> np.ndarray:
    l1, l2 = inp.lambda1, inp.lambda2
    gamma = gamma_complex((l1 + l2) / (2.0 * l1) - 1j * tau / l1)
    return gamma * np.exp(-np.pi * tau / (2.0 * l1))


def mu(inp: QuantizationInput, tau, h: float):
    """
    μ(τ, h) = Γ((λ1+λ2)/(2λ1) - iτ/λ1) e^{-πτ/(2λ1)} Σk e^{iAk/h} Bk e^{iTkτ}

    `tau` may be a scalar or an array.
    """
    tau_arr = np.asarray(tau, dtype=np.complex128)
    total = np.zeros(tau_arr.shape, dtype=np.complex128)
    for datum in inp.data:
        _, theta = action_phase(datum.action_A, h)
        total = total + np.exp(1j * theta) * datum.amplitude_B * np.exp(1j * datum.time_T * tau_arr)
    result = _gamma_mu_prefactor(inp, tau_arr) * total
    if np.ndim(tau) == 0:
        return complex(result)
    return result


def mu_scale(inp: QuantizationInput, tau):
    """Σk |Γ e^{-πτ/(2λ1)} Bk e^{iTkτ}|, the size μ would have without cancellation"""
    tau_arr = np.asarray(tau, dtype=np.complex128)
    total = np.zeros(tau_arr.shape)
    for datum in inp.data:
        total = total + np.abs(datum.amplitude_B * np.exp(1j * datum.time_T * tau_arr))
    result = np.abs(_gamma_mu_prefactor(inp, tau_arr)) * total
    if np.ndim(tau) == 0:
        return float(result)
    return result


def _log_factors(inp: QuantizationInput, s: complex, h: float) -> Tuple[np.ndarray, np.ndarray]:
    l1 = inp.lambda1
    log_rows, log_cols = [], []
    for datum in inp.data:
        _, theta = action_phase(datum.action_A, h)
        log_c = np.log(datum.M_ratio) - 0.5j * np.pi * (datum.maslov_nu + 0.5)
        log_base = np.log(l1 * datum.g_plus_norm) + 0.5j * np.pi
        log_rows.append(1j * theta + log_c - s * log_base)
        log_g_minus = np.log(datum.g_minus_norm)
        log_cols.append(log_g_minus - s * log_g_minus)
    return np.array(log_rows), np.array(log_cols)


def build_Q(inp: QuantizationInput, z: complex, h: float) -> QuantizationMatrix:
    """
    𝒬k,l(z,h) = e^{iAk/h} Γ(S/λ1) √(λ1/2π) ck |g-^l| (iλ1|g+^k||g-^l|)^{-S/λ1}

    with ck = (Mk+/Mk-) e^{-iπ(νk+1/2)/2}. The principal power splits over the
    two moduli, so the matrix is assembled directly as an outer product.
    """
    S = rescaled_S(z, h, inp.lambda1, inp.lambda2, inp.E0).value
    pole_margin = -0.5 * (inp.lambda1 + inp.lambda2)
    if (complex(z) - inp.E0).imag / h <= pole_margin:
        raise DomainError(f"Im(z - E0)/h must exceed {pole_margin} (Γ poles), got z={z}, h={h}")

    s = S / inp.lambda1
    scale = gamma_complex(s) * np.sqrt(inp.lambda1 / TWO_PI)
    log_rows, log_cols = _log_factors(inp, s, h)
    rows, cols = np.exp(log_rows), np.exp(log_cols)
    entries = scale * np.outer(rows, cols)
    return QuantizationMatrix(entries=entries, z=complex(z), h=float(h),
                              row_factor=scale * rows, col_factor=cols)


def _check_delta(delta: float) -> None:
    if not 0 < delta < 0.5:
        raise DomainError(f"δ must lie in (0, 1/2), got {delta}")


def build_Q_tilde(inp: QuantizationInput, z: complex, h: float, delta: float) -> QuantizationMatrix:
    """𝒬 with the perturbed row multiplied by e^{-iwh^δ}"""
    _check_delta(delta)
    q = build_Q(inp, z, h)
    p = inp.perturbed_index - 1
    factor = np.exp(-1j * inp.w * h ** delta)
    entries = q.entries.copy()
    entries[p, :] *= factor
    rows = q.row_factor.copy()
    rows[p] *= factor
    return QuantizationMatrix(entries=entries, z=q.z, h=q.h, perturbed=True, delta=float(delta),
                              row_factor=rows, col_factor=q.col_factor)


def weight_matrix(inp: QuantizationInput) -> np.ndarray:
    """𝒲 = diag(0, ..., -iw, ..., 0) with -iw at the perturbed index"""
    weights = np.zeros((inp.K, inp.K), dtype=np.complex128)
    p = inp.perturbed_index - 1
    weights[p, p] = -1j * inp.w
    return weights


def wq_eigenvalues(inp: QuantizationInput, z: complex, h: float) -> Tuple[complex, np.ndarray]:
    """The single possibly-nonzero eigenvalue -iw𝒬pp of 𝒲𝒬, and the K-1 zeros"""
    q = build_Q(inp, z, h)
    p = inp.perturbed_index - 1
    nonzero = -1j * inp.w * q.entries[p, p]
    return complex(nonzero), np.zeros(inp.K - 1, dtype=np.complex128)


def quantization_function(inp: QuantizationInput, z: complex, h: float, delta: float) -> complex:
    """F(z) = h^{S/λ1 - 1/2 + δ} (-iw𝒬pp(z,h)) - 1; zeros are pseudo-resonances"""
    _check_delta(delta)
    eigenvalue, _ = wq_eigenvalues(inp, z, h)
    if eigenvalue == 0:
        return -1.0 + 0j
    S = rescaled_S(z, h, inp.lambda1, inp.lambda2, inp.E0).value
    return complex(complex_pow(h, S / inp.lambda1 - 0.5 + delta) * eigenvalue - 1.0)


def h_power(inp: QuantizationInput, z: complex, h: float, shift: float = 0.0) -> complex:
    """h^{S/λ1 - 1/2 + shift}"""
    S = rescaled_S(z, h, inp.lambda1, inp.lambda2, inp.E0).value
    return complex(complex_pow(h, S / inp.lambda1 - 0.5 + shift))
