"""
Pseudo-Resonance Module
Lattice asymptotics z_q(τ), the μ̃ function, and the windowed solver for the
scalar quantization condition

All solving and counting is done in the local variable ζ = (z - E0)/h, where
the action phase A/h is reduced modulo 2π exactly.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import (
    ContourTooClose,
    CountMismatch,
    DerivativeVanished,
    DomainError,
    NoConvergence,
    PoleError,
)
from numerics.root_finding import ContourWindow, count_zeros_adaptive, newton_root
from numerics.special_functions import digamma_complex, log_gamma_complex, principal_log
from spectral.quantization import TWO_PI, QuantizationInput, action_phase

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PseudoResonance:
    """A root z of the quantization condition with its lattice label"""

    z: complex
    q: int
    tau: float
    residual: float
    h: float
    zeta: complex

    @property
    def depth_ratio(self) -> float:
        """Im z / h"""
        return self.zeta.imag

    def to_row(self) -> Dict:
        return {
            'h': self.h,
            'q': self.q,
            're_z': self.z.real,
            'im_z': self.z.imag,
            'tau': self.tau,
            'im_z_over_h': self.zeta.imag,
            'residual': self.residual,
        }


def default_coupling(inp: QuantizationInput) -> complex:
    """-iw, the nonzero entry of 𝒲"""
    return -1j * inp.w


def nominal_depth(inp: QuantizationInput, delta: float) -> float:
    """λ2/2 + δλ1"""
    return 0.5 * inp.lambda2 + delta * inp.lambda1


def _log_b(inp: QuantizationInput) -> complex:
    datum = inp.perturbed
    return np.log(inp.lambda1 * datum.g_plus_norm * datum.g_minus_norm) + 0.5j * np.pi


def log_mu_tilde(inp: QuantizationInput, tau, delta: float, coupling: Optional[complex] = None):
    """
    Continuous-branch log μ̃(τ), where

    μ̃(τ) = c Γ(1/2 - δ - iτ/λ1) √(λ1/2π) (M+/M-) e^{-iπ(ν+1/2)/2} |g-| b^{-1/2+δ+iτ/λ1}

    with b = iλ1|g+||g-| and c = -iw for the small perturbation.
    """
    if coupling is None:
        coupling = default_coupling(inp)
    if coupling == 0:
        raise DomainError("μ̃ is undefined without a perturbation (w = 0)")
    datum = inp.perturbed
    l1 = inp.lambda1
    tau_arr = np.asarray(tau, dtype=np.complex128)
    result = (
        principal_log(complex(coupling))
        + log_gamma_complex(0.5 - delta - 1j * tau_arr / l1)
        + 0.5 * np.log(l1 / TWO_PI)
        + np.log(datum.M_ratio)
        - 0.5j * np.pi * (datum.maslov_nu + 0.5)
        + np.log(datum.g_minus_norm)
        + (-0.5 + delta + 1j * tau_arr / l1) * _log_b(inp)
    )
    if np.ndim(tau) == 0:
        return complex(result)
    return result


def mu_tilde(inp: QuantizationInput, tau, delta: float, coupling: Optional[complex] = None):
    return np.exp(log_mu_tilde(inp, tau, delta, coupling))


def _d_log_mu_tilde(inp: QuantizationInput, tau: complex, delta: float) -> complex:
    l1 = inp.lambda1
    psi = digamma_complex(0.5 - delta - 1j * tau / l1)
    return complex((-1j / l1) * psi + (1j / l1) * _log_b(inp))


def _wrap_phase(phase):
    """Representative of a phase in (-π, π]"""
    return phase - TWO_PI * np.ceil((phase - np.pi) / TWO_PI)


def principal_log_mu_tilde(inp: QuantizationInput, tau, delta: float,
                           coupling: Optional[complex] = None):
    value = log_mu_tilde(inp, tau, delta, coupling)
    return np.real(value) + 1j * _wrap_phase(np.imag(value))


def log_quantization_local(inp: QuantizationInput, zeta, h: float, delta: float,
                           coupling: Optional[complex] = None):
    """
    L(ζ) with F + 1 = e^{L}:

    L = iτc|ln h|/λ1 + iθ + log μ̃(τc),  τc = ζ + i(λ2/2 + δλ1)
    """
    _, theta = action_phase(inp.perturbed.action_A, h)
    ell = -np.log(h)
    tau_c = np.asarray(zeta, dtype=np.complex128) + 1j * nominal_depth(inp, delta)
    result = 1j * tau_c * ell / inp.lambda1 + 1j * theta + log_mu_tilde(inp, tau_c, delta, coupling)
    if np.ndim(zeta) == 0:
        return complex(result)
    return result


def d_log_quantization_local(inp: QuantizationInput, zeta: complex, h: float, delta: float) -> complex:
    """dL/dζ = (-i/λ1)(ln h + ψ(S/λ1) - Log b)"""
    tau_c = complex(zeta) + 1j * nominal_depth(inp, delta)
    return complex(1j * (-np.log(h)) / inp.lambda1 + _d_log_mu_tilde(inp, tau_c, delta))


def quantization_function_local(inp: QuantizationInput, zeta, h: float, delta: float,
                                coupling: Optional[complex] = None):
    """F in the local variable ζ = (z - E0)/h (scalar or array)"""
    return np.exp(log_quantization_local(inp, zeta, h, delta, coupling)) - 1.0


def lattice_zeta_q(inp: QuantizationInput, tau: float, q: int, h: float, delta: float,
                   coupling: Optional[complex] = None) -> complex:
    """Local lattice point (z_q(τ) - E0)/h"""
    turns, theta = action_phase(inp.perturbed.action_A, h)
    ell = -np.log(h)
    l1 = inp.lambda1
    log_mu = principal_log_mu_tilde(inp, float(tau), delta, coupling)
    return complex(
        l1 * (TWO_PI * (q - turns) - theta) / ell
        - 1j * nominal_depth(inp, delta)
        + 1j * l1 * log_mu / ell
    )


def lattice_z_q(inp: QuantizationInput, tau: float, q: int, h: float, delta: float) -> complex:
    """
    z_q(τ) = E0 + λ1(2πqh - A)/|ln h| - ih(λ2/2 + δλ1) + iλ1h ln μ̃(τ)/|ln h|

    ln is the principal branch; A is the action of the perturbed trajectory.
    """
    if not 0 < delta < 0.5:
        raise DomainError(f"δ must lie in (0, 1/2), got {delta}")
    return inp.E0 + h * lattice_zeta_q(inp, tau, q, h, delta)


def local_window(inp: QuantizationInput, h: float, delta: float, re_min: float, re_max: float,
                 C: float, im_upper: float = 1.0) -> ContourWindow:
    """
    ζ-window [re_min, re_max] + i[-(λ2/2+δλ1) - C/|ln h|, im_upper]

    The lower margin is clipped to half the distance from the nominal depth to
    the first Γ pole at Im ζ = -(λ1+λ2)/2.
    """
    ell = -np.log(h)
    margin = min(C / ell, 0.5 * (0.5 - delta) * inp.lambda1)
    return ContourWindow.from_bounds(re_min, re_max, -nominal_depth(inp, delta) - margin, im_upper)


def global_to_local(inp: QuantizationInput, window: ContourWindow, h: float) -> ContourWindow:
    center = (complex(window.center) - inp.E0) / h
    return ContourWindow(center, window.half_width_re / h,
                         window.half_width_im_low / h, window.half_width_im_high / h)


class PseudoResonanceSolver:
    """
    Enumerates the zeros of F in a ζ-window

    Seeds come from the lattice structure of the condition L(ζ) = 2πik, are
    refined by Newton on the logarithmic form and certified against the
    argument-principle count.
    """

    def __init__(self, newton_tol: float = 1e-12, max_iter: int = 50, residual_tol: float = 1e-10,
                 samples_per_side: int = 512, max_samples_per_side: int = 32768,
                 contour_threshold: float = 1e-10, seed_iterations: int = 5):
        self.newton_tol = newton_tol
        self.max_iter = max_iter
        self.residual_tol = residual_tol
        self.samples_per_side = samples_per_side
        self.max_samples_per_side = max_samples_per_side
        self.contour_threshold = contour_threshold
        self.seed_iterations = seed_iterations

    @classmethod
    def from_settings(cls, settings: Dict) -> 'PseudoResonanceSolver':
        keys = ('newton_tol', 'max_iter', 'residual_tol', 'samples_per_side',
                'max_samples_per_side', 'contour_threshold', 'seed_iterations')
        return cls(**{k: settings[k] for k in keys if k in settings})

    def _branch_index(self, inp: QuantizationInput, tau: float, delta: float,
                      coupling: complex) -> int:
        continuous = log_mu_tilde(inp, tau, delta, coupling).imag
        return int(round((continuous - _wrap_phase(continuous)) / TWO_PI))

    def _newton(self, inp: QuantizationInput, h: float, delta: float, coupling: complex,
                k: int, seed: complex) -> Optional[complex]:
        target = TWO_PI * k * 1j

        def g(zeta):
            return log_quantization_local(inp, zeta, h, delta, coupling) - target

        def dg(zeta):
            return d_log_quantization_local(inp, zeta, h, delta)

        try:
            result = newton_root(g, seed, tol=self.newton_tol, max_iter=self.max_iter,
                                 fprime=dg)
        except (NoConvergence, DerivativeVanished, PoleError) as e:
            logger.debug(f"Seed {seed} (k={k}) discarded: {str(e)}")
            return None
        return result.root

    def _phase_seeds(self, inp: QuantizationInput, h: float, delta: float, coupling: complex,
                     window: ContourWindow) -> List[Tuple[int, complex]]:
        """(k, ζ-seed) pairs from the real crossings Φ(τ) = 2πk"""
        _, theta = action_phase(inp.perturbed.action_A, h)
        ell = -np.log(h)
        l1 = inp.lambda1
        spacing = TWO_PI * l1 / ell
        pad = 2.0 * spacing
        n_grid = max(400, int(40 * (window.re_max - window.re_min + 2 * pad) / spacing))
        taus = np.linspace(window.re_min - pad, window.re_max + pad, n_grid)
        phase = ell * taus / l1 + theta + np.imag(log_mu_tilde(inp, taus, delta, coupling))

        seeds = []
        for k in range(int(np.floor(phase.min() / TWO_PI)), int(np.ceil(phase.max() / TWO_PI)) + 1):
            offset = phase - TWO_PI * k
            crossings = np.nonzero(np.sign(offset[:-1]) != np.sign(offset[1:]))[0]
            for i in crossings:
                t0, t1 = taus[i], taus[i + 1]
                tau = t0 - offset[i] * (t1 - t0) / (offset[i + 1] - offset[i])
                tau_c = complex(tau)
                try:
                    for _ in range(self.seed_iterations):
                        tau_c = l1 * (TWO_PI * k - theta + 1j * log_mu_tilde(inp, tau_c, delta, coupling)) / ell
                except PoleError:
                    continue
                if np.isfinite(tau_c):
                    seeds.append((k, tau_c - 1j * nominal_depth(inp, delta)))
        return seeds

    def _grid_seeds(self, inp: QuantizationInput, h: float, delta: float, coupling: complex,
                    window: ContourWindow) -> List[Tuple[int, complex]]:
        """Fallback seeds on a grid covering the window"""
        ell = -np.log(h)
        spacing = TWO_PI * inp.lambda1 / ell
        n_re = max(8, int(4 * (window.re_max - window.re_min) / spacing))
        res = np.linspace(window.re_min, window.re_max, n_re)
        ims = np.linspace(window.im_min, window.im_max, 7)[1:-1]
        seeds = []
        for im in ims:
            for re in res:
                zeta = complex(re, im)
                value = log_quantization_local(inp, zeta, h, delta, coupling)
                seeds.append((int(round(value.imag / TWO_PI)), zeta))
        return seeds

    def _collect(self, inp: QuantizationInput, h: float, delta: float, coupling: complex,
                 window: ContourWindow, seeds: List[Tuple[int, complex]],
                 roots: List[Tuple[int, complex]]) -> None:
        radius = 0.5 / (-np.log(h))
        for k, seed in seeds:
            root = self._newton(inp, h, delta, coupling, k, seed)
            if root is None or not window.contains(root):
                continue
            residual = abs(quantization_function_local(inp, root, h, delta, coupling))
            if residual >= self.residual_tol:
                logger.warning(f"Root {root} at h={h:.3e} has residual {residual:.2e}; discarded")
                continue
            if all(abs(root - other) > radius for _, other in roots):
                roots.append((k, root))

    def solve_local(self, inp: QuantizationInput, h: float, delta: float, window: ContourWindow,
                    coupling: Optional[complex] = None) -> List[PseudoResonance]:
        """Pseudo-resonances with ζ inside `window`, sorted by Re z"""
        if coupling is None:
            coupling = default_coupling(inp)
        if coupling == 0:
            logger.debug("No perturbation, so no pseudo-resonances")
            return []

        roots: List[Tuple[int, complex]] = []
        self._collect(inp, h, delta, coupling, window,
                      self._phase_seeds(inp, h, delta, coupling, window), roots)

        def f(zeta):
            return quantization_function_local(inp, zeta, h, delta, coupling)

        expected = count_zeros_adaptive(f, window, self.samples_per_side,
                                        self.max_samples_per_side, self.contour_threshold).count
        if expected != len(roots):
            logger.info(f"Lattice seeding found {len(roots)} of {expected} roots at h={h:.3e}; "
                        f"retrying with grid seeds")
            self._collect(inp, h, delta, coupling, window,
                          self._grid_seeds(inp, h, delta, coupling, window), roots)
        if expected != len(roots):
            raise CountMismatch(f"{len(roots)} Newton roots but winding count {expected} at h={h:.3e}")

        turns, _ = action_phase(inp.perturbed.action_A, h)
        resonances = []
        for k, zeta in sorted(roots, key=lambda pair: pair[1].real):
            q = turns + k - self._branch_index(inp, zeta.real, delta, coupling)
            resonances.append(PseudoResonance(
                z=complex(inp.E0 + h * zeta),
                q=int(q),
                tau=float(zeta.real),
                residual=float(abs(f(zeta))),
                h=float(h),
                zeta=complex(zeta),
            ))
        logger.debug(f"{len(resonances)} pseudo-resonances at h={h:.3e}")
        return resonances

    def solve_with_retry(self, inp: QuantizationInput, h: float, delta: float,
                         window: ContourWindow, coupling: Optional[complex] = None,
                         attempts: int = 3, shrink: float = 0.01) -> Tuple[List[PseudoResonance], ContourWindow]:
        """solve_local, shrinking the window when a root sits on its contour"""
        for attempt in range(attempts + 1):
            try:
                return self.solve_local(inp, h, delta, window, coupling), window
            except ContourTooClose:
                if attempt == attempts:
                    raise
                window = window.shrunk(shrink)
                logger.warning(f"Root on the contour at h={h:.3e}; shrinking window by {shrink:.0%}")


def pseudo_resonances_in_window(inp: QuantizationInput, h: float, delta: float,
                                window: ContourWindow,
                                solver: Optional[PseudoResonanceSolver] = None) -> List[PseudoResonance]:
    """Pseudo-resonances of the perturbed problem inside a window given in z"""
    if not 0 < delta < 0.5:
        raise DomainError(f"δ must lie in (0, 1/2), got {delta}")
    solver = solver or PseudoResonanceSolver()
    return solver.solve_local(inp, h, delta, global_to_local(inp, window, h))
