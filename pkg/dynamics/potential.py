"""
Potential Module
Barrier-top potential V_top = V1(x1)V2(x2), croissant reflector V_ref and the
perturbation bump W, with analytic gradients
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import ValidationError

logger = logging.getLogger(__name__)

HESSIAN_STEP = 1e-5


def _transition(t):
    """e^{-1/t} for t > 0, 0 otherwise"""
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def _transition_prime(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe) / safe ** 2, 0.0)


def smooth_step(t):
    """C^∞ step: 0 for t <= 0, 1 for t >= 1"""
    f, g = _transition(t), _transition(1.0 - np.asarray(t, dtype=float))
    return f / (f + g)


def smooth_step_prime(t):
    t = np.asarray(t, dtype=float)
    f, g = _transition(t), _transition(1.0 - t)
    fp, gp = _transition_prime(t), _transition_prime(1.0 - t)
    return (fp * g + f * gp) / (f + g) ** 2


def bump(s):
    """exp(1 - 1/(1 - s²)) on |s| < 1, so bump(0) = 1"""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe ** 2)), 0.0)


def bump_prime(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, bump(safe) * (-2.0 * safe / (1.0 - safe ** 2) ** 2), 0.0)


def cutoff(s, flat: float, outer: float):
    """1 on |s| <= flat, 0 on |s| >= outer"""
    return 1.0 - smooth_step((np.abs(s) - flat) / (outer - flat))


def cutoff_prime(s, flat: float, outer: float):
    s = np.asarray(s, dtype=float)
    return -smooth_step_prime((np.abs(s) - flat) / (outer - flat)) * np.sign(s) / (outer - flat)


@dataclass(frozen=True)
class BarrierShape:
    """Cutoff of a single barrier: flat on |s| <= flat, supported in |s| < cutoff"""

    flat: float = 0.3
    cutoff: float = 0.8


@dataclass(frozen=True)
class ReflectorShape:
    """Croissant: ring of radius ring_radius around (center, 0), limited to |angle| < aperture"""

    center: float = 1.5
    ring_radius: float = 3.0
    radial_width: float = 0.3
    aperture: float = 0.9
    flat_aperture: float = 0.6
    height: float = 2.0


@dataclass(frozen=True)
class BumpShape:
    center: Tuple[float, float] = (2.2, -1.1)
    radius: float = 0.6
    amplitude: float = 1.0


@dataclass(frozen=True)
class PotentialSpec:
    """
    V = V_top + V_ref with V_top(x) = V1(x1)V2(x2)

    V1 = (E0 - λ1²x1²/4)χ1(x1), V2 = (1 - λ2²x2²/(4E0))χ2(x2). top_model
    'quadratic' replaces V_top by the bare saddle E0 - λ1²x1²/4 - λ2²x2²/4.
    """

    lambda1: float = 1.0
    lambda2: float = 1.5
    E0: float = 1.0
    v1_shape: BarrierShape = field(default_factory=BarrierShape)
    v2_shape: BarrierShape = field(default_factory=BarrierShape)
    vref_shape: Optional[ReflectorShape] = field(default_factory=ReflectorShape)
    w_shape: Optional[BumpShape] = field(default_factory=BumpShape)
    symmetric: bool = True
    top_model: str = 'product'

    @classmethod
    def reference(cls) -> 'PotentialSpec':
        """Symmetric croissant geometry with three homoclinic trajectories"""
        return cls()

    @classmethod
    def quadratic_model(cls, lambda1: float = 1.0, lambda2: float = 1.5, E0: float = 1.0) -> 'PotentialSpec':
        return cls(lambda1=lambda1, lambda2=lambda2, E0=E0, vref_shape=None, w_shape=None,
                   top_model='quadratic')

    @classmethod
    def from_dict(cls, record: Dict) -> 'PotentialSpec':
        values = dict(record)
        for key, shape in (('v1_shape', BarrierShape), ('v2_shape', BarrierShape)):
            if key in values:
                values[key] = shape(**values[key])
        if values.get('vref_shape') is not None:
            values['vref_shape'] = ReflectorShape(**values['vref_shape'])
        if values.get('w_shape') is not None:
            w = dict(values['w_shape'])
            w['center'] = tuple(float(c) for c in w.get('center', BumpShape.center))
            values['w_shape'] = BumpShape(**w)
        try:
            return cls(**values)
        except TypeError as e:
            raise ValidationError(f"invalid potential section: {str(e)}", provenance="dynamics")

    def to_dict(self) -> Dict:
        record = asdict(self)
        if self.w_shape is not None:
            record['w_shape']['center'] = list(self.w_shape.center)
        return record

    def problems(self) -> List[str]:
        issues = []
        if not 0 < self.lambda1 < self.lambda2:
            issues.append(f"need 0 < λ1 < λ2, got λ1={self.lambda1}, λ2={self.lambda2}")
        if self.E0 <= 0:
            issues.append(f"E0 must be positive, got {self.E0}")
        if self.top_model not in ('product', 'quadratic'):
            issues.append(f"unknown top_model '{self.top_model}'")
        for name, shape in (('v1_shape', self.v1_shape), ('v2_shape', self.v2_shape)):
            if not 0 < shape.flat < shape.cutoff:
                issues.append(f"{name} needs 0 < flat < cutoff")
        ref = self.vref_shape
        if ref is not None:
            if ref.height <= self.E0:
                issues.append(f"reflector height {ref.height} must exceed E0={self.E0}")
            if not 0 < ref.flat_aperture < ref.aperture < np.pi:
                issues.append("reflector needs 0 < flat_aperture < aperture < π")
            if not 0 < ref.radial_width < ref.ring_radius:
                issues.append("reflector needs 0 < radial_width < ring_radius")
            corners = np.array([[sx * self.v1_shape.cutoff, sy * self.v2_shape.cutoff]
                                for sx in (-1, 1) for sy in (-1, 1)])
            reach = float(np.max(np.hypot(corners[:, 0] - ref.center, corners[:, 1])))
            if reach >= ref.ring_radius - ref.radial_width:
                issues.append("V_top support reaches into the reflector ring")
        bump_shape = self.w_shape
        if bump_shape is not None:
            cx, cy = bump_shape.center
            if bump_shape.amplitude < 0 or bump_shape.radius <= 0:
                issues.append("W needs amplitude >= 0 and radius > 0")
            gap_x = abs(cx) - self.v1_shape.cutoff
            gap_y = abs(cy) - self.v2_shape.cutoff
            if max(gap_x, gap_y) < bump_shape.radius:
                issues.append("supp W meets supp V_top")
            if ref is not None:
                distance = float(np.hypot(cx - ref.center, cy))
                inner = ref.ring_radius - ref.radial_width
                outer = ref.ring_radius + ref.radial_width
                if not (distance + bump_shape.radius < inner or distance - bump_shape.radius > outer):
                    issues.append("supp W meets supp V_ref")
        return issues

    def validate(self) -> 'PotentialSpec':
        issues = self.problems()
        if issues:
            raise ValidationError("; ".join(issues), provenance="dynamics")
        return self


def _v1(spec: PotentialSpec, x1):
    return (spec.E0 - spec.lambda1 ** 2 * x1 ** 2 / 4.0) * cutoff(x1, spec.v1_shape.flat, spec.v1_shape.cutoff)


def _v1_prime(spec: PotentialSpec, x1):
    shape = spec.v1_shape
    return (-spec.lambda1 ** 2 * x1 / 2.0 * cutoff(x1, shape.flat, shape.cutoff)
            + (spec.E0 - spec.lambda1 ** 2 * x1 ** 2 / 4.0) * cutoff_prime(x1, shape.flat, shape.cutoff))


def _v2(spec: PotentialSpec, x2):
    k = spec.lambda2 ** 2 / (4.0 * spec.E0)
    return (1.0 - k * x2 ** 2) * cutoff(x2, spec.v2_shape.flat, spec.v2_shape.cutoff)


def _v2_prime(spec: PotentialSpec, x2):
    shape = spec.v2_shape
    k = spec.lambda2 ** 2 / (4.0 * spec.E0)
    return (-2.0 * k * x2 * cutoff(x2, shape.flat, shape.cutoff)
            + (1.0 - k * x2 ** 2) * cutoff_prime(x2, shape.flat, shape.cutoff))


def _polar(ref: ReflectorShape, x1, x2):
    dx = x1 - ref.center
    rho = np.hypot(dx, x2)
    return dx, rho, np.arctan2(x2, dx)


def _angular(ref: ReflectorShape, psi):
    return cutoff(psi, ref.flat_aperture, ref.aperture)


def eval_top(spec: PotentialSpec, x) -> float:
    x1, x2 = float(x[0]), float(x[1])
    if spec.top_model == 'quadratic':
        return spec.E0 - spec.lambda1 ** 2 * x1 ** 2 / 4.0 - spec.lambda2 ** 2 * x2 ** 2 / 4.0
    return float(_v1(spec, x1) * _v2(spec, x2))


def eval_reflector(spec: PotentialSpec, x) -> float:
    ref = spec.vref_shape
    if ref is None:
        return 0.0
    _, rho, psi = _polar(ref, float(x[0]), float(x[1]))
    return float(ref.height * bump((rho - ref.ring_radius) / ref.radial_width) * _angular(ref, psi))


def eval_potential(spec: PotentialSpec, x) -> float:
    """V(x) = V_top(x) + V_ref(x)"""
    return eval_top(spec, x) + eval_reflector(spec, x)


def eval_gradient(spec: PotentialSpec, x) -> np.ndarray:
    """Analytic ∇V(x)"""
    x1, x2 = float(x[0]), float(x[1])
    if spec.top_model == 'quadratic':
        grad = np.array([-spec.lambda1 ** 2 * x1 / 2.0, -spec.lambda2 ** 2 * x2 / 2.0])
    else:
        grad = np.array([_v1_prime(spec, x1) * _v2(spec, x2), _v1(spec, x1) * _v2_prime(spec, x2)], dtype=float)

    ref = spec.vref_shape
    if ref is not None:
        dx, rho, psi = _polar(ref, x1, x2)
        s = (rho - ref.ring_radius) / ref.radial_width
        radial = bump(s)
        if radial > 0:
            angular = _angular(ref, psi)
            d_rho = ref.height * bump_prime(s) / ref.radial_width * angular
            d_psi = ref.height * radial * cutoff_prime(psi, ref.flat_aperture, ref.aperture)
            grad = grad + d_rho * np.array([dx, x2]) / rho + d_psi * np.array([-x2, dx]) / rho ** 2
    return grad


def eval_hessian(spec: PotentialSpec, x, step: float = HESSIAN_STEP) -> np.ndarray:
    """Central differences of the analytic gradient, symmetrized"""
    x = np.asarray(x, dtype=float)
    hessian = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        hessian[:, j] = (eval_gradient(spec, x + e) - eval_gradient(spec, x - e)) / (2.0 * step)
    return 0.5 * (hessian + hessian.T)


def eval_perturbation(spec: PotentialSpec, x) -> float:
    """W(x) = amplitude·bump(|x - c|/r)"""
    shape = spec.w_shape
    if shape is None or shape.amplitude == 0:
        return 0.0
    distance = float(np.hypot(x[0] - shape.center[0], x[1] - shape.center[1]))
    return float(shape.amplitude * bump(distance / shape.radius))


def in_top_support(spec: PotentialSpec, x) -> bool:
    if spec.top_model == 'quadratic':
        return True
    return abs(x[0]) < spec.v1_shape.cutoff and abs(x[1]) < spec.v2_shape.cutoff


def in_reflector_support(spec: PotentialSpec, x) -> bool:
    ref = spec.vref_shape
    if ref is None:
        return False
    _, rho, psi = _polar(ref, float(x[0]), float(x[1]))
    return abs(rho - ref.ring_radius) < ref.radial_width and abs(psi) < ref.aperture
