"""
Homoclinic Invariants Module
Per-trajectory invariants (action, amplitude, period, Maslov index, asymptotic
vectors, Jacobian limits, perturbation integral) and their extraction from
computed homoclinic trajectories
"""

import logging
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

from dynamics.flow import Trajectory, linearized_field
from dynamics.potential import PotentialSpec, eval_perturbation
from errors import DomainError, FitResidualTooLarge, NonPositive, StepFailure, ValidationError
from numerics.extrapolation import ExtrapolationResult, limit_extrapolate
from numerics.special_functions import complex_pow

logger = logging.getLogger(__name__)

COLLINEAR_TOLERANCE = 1e-6
R_FIT = 1.6e-2
MAX_FIT_RESIDUAL = 1e-4


def amplitude_B(lambda1: float, lambda2: float, M_plus: float, M_minus: float, maslov_nu: int,
                g_plus_norm: float, g_minus_norm: float) -> complex:
    """
    B = √(λ1/2π) (M+/M-) e^{-iπ(ν+1/2)/2} |g-| (iλ1|g+||g-|)^{-(λ1+λ2)/(2λ1)}

    The power uses the principal branch, so the base i·λ1|g+||g-| has argument π/2.
    """
    prefactor = np.sqrt(lambda1 / (2.0 * np.pi)) * (M_plus / M_minus)
    maslov_phase = np.exp(-0.5j * np.pi * (maslov_nu + 0.5))
    base = 1j * lambda1 * g_plus_norm * g_minus_norm
    power = complex_pow(base, -(lambda1 + lambda2) / (2.0 * lambda1))
    return complex(prefactor * maslov_phase * g_minus_norm * power)


def period_T(lambda1: float, g_plus_norm: float, g_minus_norm: float) -> float:
    """T = ln(λ1|g+||g-|)/λ1"""
    return float(np.log(lambda1 * g_plus_norm * g_minus_norm) / lambda1)


@dataclass(frozen=True)
class HomoclinicDatum:
    """Invariants of one homoclinic trajectory γk (index k is 1-based)"""

    index: int
    action_A: float
    amplitude_B: complex
    time_T: float
    maslov_nu: int
    g_plus: Tuple[float, float]
    g_minus: Tuple[float, float]
    M_plus: float
    M_minus: float
    w_integral: float = 0.0
    fit_residual_plus: float = 0.0
    fit_residual_minus: float = 0.0
    M_plus_error: float = 0.0
    M_minus_error: float = 0.0

    @classmethod
    def build(cls, index: int, action_A: float, maslov_nu: int, g_plus: Sequence[float],
              g_minus: Sequence[float], M_plus: float, M_minus: float, lambda1: float,
              lambda2: float, w_integral: float = 0.0, **diagnostics) -> 'HomoclinicDatum':
        """Datum with B and T evaluated from the remaining invariants"""
        g_plus = (float(g_plus[0]), float(g_plus[1]))
        g_minus = (float(g_minus[0]), float(g_minus[1]))
        gp, gm = float(np.hypot(*g_plus)), float(np.hypot(*g_minus))
        return cls(
            index=int(index),
            action_A=float(action_A),
            amplitude_B=amplitude_B(lambda1, lambda2, M_plus, M_minus, maslov_nu, gp, gm),
            time_T=period_T(lambda1, gp, gm),
            maslov_nu=int(maslov_nu),
            g_plus=g_plus,
            g_minus=g_minus,
            M_plus=float(M_plus),
            M_minus=float(M_minus),
            w_integral=float(w_integral),
            **diagnostics,
        )

    @property
    def g_plus_norm(self) -> float:
        return float(np.hypot(*self.g_plus))

    @property
    def g_minus_norm(self) -> float:
        return float(np.hypot(*self.g_minus))

    @property
    def M_ratio(self) -> float:
        return self.M_plus / self.M_minus

    def with_w(self, w_integral: float) -> 'HomoclinicDatum':
        return replace(self, w_integral=float(w_integral))

    def problems(self, collinear_tol: float = COLLINEAR_TOLERANCE) -> List[str]:
        """Violated datum invariants, empty when the datum is admissible"""
        issues = []
        if self.amplitude_B == 0 or not np.isfinite(self.amplitude_B):
            issues.append(f"γ{self.index}: amplitude B must be finite and nonzero")
        if not np.isfinite(self.time_T):
            issues.append(f"γ{self.index}: period T must be finite")
        for name, value in (('M_plus', self.M_plus), ('M_minus', self.M_minus)):
            if not (np.isfinite(value) and value > 0):
                issues.append(f"γ{self.index}: {name} = {value} must lie in (0, ∞)")
        for name, vector in (('g_plus', self.g_plus), ('g_minus', self.g_minus)):
            norm = float(np.hypot(*vector))
            if norm == 0 or not np.isfinite(norm):
                issues.append(f"γ{self.index}: {name} must be nonzero")
            elif np.arctan2(abs(vector[1]), abs(vector[0])) > collinear_tol:
                issues.append(f"γ{self.index}: {name} = {vector} is not collinear to (1, 0)")
        return issues

    def to_dict(self) -> Dict:
        record = asdict(self)
        record['amplitude_B'] = [self.amplitude_B.real, self.amplitude_B.imag]
        record['g_plus'] = list(self.g_plus)
        record['g_minus'] = list(self.g_minus)
        return record

    @classmethod
    def from_dict(cls, record: Dict) -> 'HomoclinicDatum':
        values = dict(record)
        b_re, b_im = values.pop('amplitude_B')
        values['amplitude_B'] = complex(b_re, b_im)
        values['g_plus'] = tuple(float(v) for v in values['g_plus'])
        values['g_minus'] = tuple(float(v) for v in values['g_minus'])
        return cls(**values)

    def table_row(self) -> Dict:
        """Flat row of the invariants table"""
        return {
            'k': self.index,
            'A': self.action_A,
            'B_re': self.amplitude_B.real,
            'B_im': self.amplitude_B.imag,
            'T': self.time_T,
            'nu': self.maslov_nu,
            'g_plus_norm': self.g_plus_norm,
            'g_minus_norm': self.g_minus_norm,
            'M_plus': self.M_plus,
            'M_minus': self.M_minus,
            'w': self.w_integral,
            'fit_residual_plus': self.fit_residual_plus,
            'fit_residual_minus': self.fit_residual_minus,
            'M_plus_error': self.M_plus_error,
            'M_minus_error': self.M_minus_error,
        }


@dataclass(frozen=True)
class GVectorFit:
    g_plus: Tuple[float, float]
    g_minus: Tuple[float, float]
    residual_plus: float
    residual_minus: float


def compute_action(traj: Trajectory) -> float:
    """
    A = ∫ ξ·dx along the trajectory

    Simpson quadrature of 2|ξ|² dt over the nodes plus the quadratic-model
    tails φ+(x_start) and -φ-(x_end), i.e. x0·ξ0/2 - x_end·ξ_end/2.
    """
    if len(traj) == 0:
        return 0.0
    states = traj.states
    head = 0.5 * float(np.dot(states[0, :2], states[0, 2:]))
    tail = -0.5 * float(np.dot(states[-1, :2], states[-1, 2:]))
    if len(traj) < 2:
        return head + tail
    integrand = 2.0 * np.sum(states[:, 2:] ** 2, axis=1)
    return float(simpson(integrand, x=traj.times)) + head + tail


def _tail_window(traj: Trajectory, side: str, r_fit: float) -> np.ndarray:
    """Indices of the leading (plus) or trailing (minus) run of nodes with |x| <= r_fit"""
    inside = traj.radii <= r_fit
    if side == 'plus':
        stop = int(np.argmin(inside)) if not np.all(inside) else len(inside)
        return np.arange(stop)
    start = len(inside) - (int(np.argmin(inside[::-1])) if not np.all(inside) else len(inside))
    return np.arange(start, len(inside))


def component_rates(lambda1: float, lambda2: float) -> Tuple[List[float], List[float]]:
    """
    Tail exponents of x1 and x2 near the origin, leading rate λ1 first

    With V = V1(x1)V2(x2) quadratic on the flat part, x1 picks up e^{(λ1+2λ2)t}
    from x2² and x2 is e^{λ2 t} times a series in e^{2λ1 t}; x2 has no λ1 term.
    """
    return ([lambda1, lambda1 + 2.0 * lambda2],
            [lambda1, lambda2, lambda2 + 2.0 * lambda1, lambda2 + 4.0 * lambda1])


def fit_tail(times: np.ndarray, values: np.ndarray, rates: Sequence[float], side: str) -> Tuple[float, float]:
    """
    Least-squares fit v(t) = Σ c_j e^{±r_j t}; returns (coefficient of rates[0], residual norm)

    Columns are normalized at the window edge farthest from the origin.
    """
    sign = 1.0 if side == 'plus' else -1.0
    t_ref = float(np.max(times)) if side == 'plus' else float(np.min(times))
    basis = np.exp(sign * np.outer(times - t_ref, rates))
    coefficients, *_ = np.linalg.lstsq(basis, values, rcond=None)
    residual = float(np.linalg.norm(values - basis @ coefficients))
    return float(coefficients[0] * np.exp(-sign * rates[0] * t_ref)), residual


def fit_g_vectors(traj: Trajectory, lambda1: float, lambda2: float, r_fit: float = R_FIT,
                  max_residual: float = MAX_FIT_RESIDUAL) -> GVectorFit:
    """g± from x(t) = g± e^{±λ1 t} + o(e^{±λ1 t}) on the nodes within r_fit"""
    rates = component_rates(lambda1, lambda2)
    results = {}
    for side in ('plus', 'minus'):
        window = _tail_window(traj, side, r_fit)
        if len(window) < max(len(r) for r in rates) + 2:
            raise DomainError(f"{side} tail has {len(window)} nodes within r_fit={r_fit}")
        times, positions = traj.times[window], traj.positions[window]
        fits = [fit_tail(times, positions[:, j], rates[j], side) for j in range(2)]
        scale = float(np.linalg.norm(positions))
        residual = float(np.hypot(fits[0][1], fits[1][1]) / scale) if scale > 0 else 0.0
        if residual > max_residual:
            raise FitResidualTooLarge(f"{side} tail fit residual {residual:.2e} exceeds {max_residual:.0e}")
        results[side] = ((fits[0][0], fits[1][0]), residual)
    (gp, rp), (gm, rm) = results['plus'], results['minus']
    return GVectorFit(g_plus=gp, g_minus=gm, residual_plus=rp, residual_minus=rm)


def _radius_time(traj: Trajectory, radius: float, lo: float, hi: float) -> float:
    def offset(t):
        state = traj.state_at(t)
        return float(np.hypot(state[0], state[1])) - radius
    return float(brentq(offset, lo, hi, xtol=1e-14))


def _sample_times(traj: Trajectory, side: str, radii: Sequence[float]) -> List[float]:
    """Times where |x(t)| = r on the incoming (plus) or outgoing (minus) tail"""
    above = np.nonzero(traj.radii >= max(radii))[0]
    if len(above) == 0:
        raise DomainError("trajectory never leaves the fit radius")
    times = []
    if side == 'plus':
        lo, hi = traj.start_time, float(traj.times[above[0]])
    else:
        lo, hi = float(traj.times[above[-1]]), traj.end_time
    edge = float(np.hypot(*traj.state_at(lo if side == 'plus' else hi)[:2]))
    for r in radii:
        if r <= edge:
            continue
        times.append(_radius_time(traj, r, lo, hi))
    return times


def jacobian_limit(spec: PotentialSpec, traj: Trajectory, side: str, r_fit: float = R_FIT,
                   n_radii: int = 6, tol: float = 1e-10) -> ExtrapolationResult:
    """
    ℳ+ (side 'plus') or ℳ- (side 'minus') along a homoclinic trajectory

    Integrates the variational equations from the start of the trajectory with
    the transverse tangent (0, 1, 0, λ2/2)e^{λ2 t0} of Λ+, forms
    det(∂t x, ∂y x) = ẋ1 J2 - ẋ2 J1 and extrapolates
    √|det| e^{-s(λ1+λ2)/2} as s → -∞ or √|det| e^{-s(λ2-λ1)/2} as s → +∞
    from the times where |x| = r_fit 2^{-j}.
    """
    if traj.interpolant is None:
        raise DomainError("Jacobian limits need a trajectory with an interpolant")
    l1, l2 = spec.lambda1, spec.lambda2
    radii = [r_fit * 2.0 ** (-j) for j in range(n_radii)]
    times = sorted(_sample_times(traj, side, radii))
    t0 = traj.start_time

    def variational(t, y):
        return linearized_field(spec, traj.state_at(t)[:2]) @ y

    sol = solve_ivp(variational, (t0, times[-1]), np.array([0.0, 1.0, 0.0, l2 / 2.0]),
                    method='RK45', rtol=tol, atol=1e-14, t_eval=times)
    if sol.status == -1:
        raise StepFailure(f"variational integration failed: {sol.message}")

    exponent = (l1 + l2) / 2.0 if side == 'plus' else (l2 - l1) / 2.0
    samples = []
    for t, J in zip(sol.t, sol.y.T):
        state = traj.state_at(t)
        det = 2.0 * state[2] * J[1] - 2.0 * state[3] * J[0]
        log_value = 0.5 * (np.log(abs(det)) + l2 * t0) - exponent * t
        samples.append((float(t), float(np.exp(log_value))))

    result = limit_extrapolate(samples, noise_floor=10.0 * tol)
    if not result.limit > 0:
        raise NonPositive(f"ℳ{'+' if side == 'plus' else '-'} extrapolated to {result.limit:.3e}")
    return result


def compute_M_limits(spec: PotentialSpec, traj: Trajectory, r_fit: float = R_FIT, n_radii: int = 6,
                     tol: float = 1e-10) -> Tuple[ExtrapolationResult, ExtrapolationResult]:
    """(ℳ+, ℳ-) with error estimates"""
    return (jacobian_limit(spec, traj, 'plus', r_fit, n_radii, tol),
            jacobian_limit(spec, traj, 'minus', r_fit, n_radii, tol))


def w_integral(spec: PotentialSpec, traj: Trajectory) -> float:
    """∫ W(x(t)) dt over the nodes"""
    if len(traj) < 2:
        return 0.0
    values = np.array([eval_perturbation(spec, x) for x in traj.positions])
    if not np.any(values):
        return 0.0
    return float(simpson(values, x=traj.times))


def assemble_invariants(spec: PotentialSpec, trajectories: Sequence[Trajectory],
                        maslov_overrides: Sequence[int], r_fit: float = R_FIT, n_radii: int = 6,
                        tol: float = 1e-10, max_fit_residual: float = MAX_FIT_RESIDUAL) -> List[HomoclinicDatum]:
    """HomoclinicDatum for each trajectory, with ν taken from maslov_overrides"""
    if len(maslov_overrides) != len(trajectories):
        raise ValidationError(f"{len(trajectories)} homoclinic trajectories but "
                              f"{len(maslov_overrides)} Maslov indices", provenance="dynamics")
    data = []
    for k, (traj, nu) in enumerate(zip(trajectories, maslov_overrides), start=1):
        fit = fit_g_vectors(traj, spec.lambda1, spec.lambda2, r_fit, max_fit_residual)
        m_plus, m_minus = compute_M_limits(spec, traj, r_fit, n_radii, tol)
        datum = HomoclinicDatum.build(
            index=k,
            action_A=compute_action(traj),
            maslov_nu=nu,
            g_plus=fit.g_plus,
            g_minus=fit.g_minus,
            M_plus=m_plus.limit,
            M_minus=m_minus.limit,
            lambda1=spec.lambda1,
            lambda2=spec.lambda2,
            w_integral=w_integral(spec, traj),
            fit_residual_plus=fit.residual_plus,
            fit_residual_minus=fit.residual_minus,
            M_plus_error=m_plus.error,
            M_minus_error=m_minus.error,
        )
        issues = datum.problems()
        if issues:
            logger.warning(f"{traj.label or k}: " + "; ".join(issues))
        logger.info(f"γ{k}: A={datum.action_A:.10f}, T={datum.time_T:.8f}, "
                    f"M+={datum.M_plus:.8f}, M-={datum.M_minus:.8f}, w={datum.w_integral:.6f}")
        data.append(datum)
    return data
