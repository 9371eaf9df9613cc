"""
Sampled check that energy-E0 trajectories leaving the reflector, once they
have touched the barrier top, do not come back to the reflector
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from dynamics.flow import PhasePoint, integrate_flow
from dynamics.potential import PotentialSpec, eval_potential, in_reflector_support, in_top_support
from errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass
class NonReturnReport:
    n_samples: int
    n_touched: int
    n_violations: int
    violations: List[List[float]] = field(default_factory=list)

    @property
    def violation_fraction(self) -> float:
        return self.n_violations / self.n_samples if self.n_samples else 0.0

    def to_dict(self) -> Dict:
        return {
            'n_samples': self.n_samples,
            'n_touched': self.n_touched,
            'n_violations': self.n_violations,
            'violation_fraction': self.violation_fraction,
            'violations': self.violations,
        }


def _sample_start(spec: PotentialSpec, rng: np.random.Generator) -> PhasePoint:
    ref = spec.vref_shape
    while True:
        rho = ref.ring_radius + ref.radial_width * rng.uniform(-0.95, 0.95)
        psi = ref.aperture * rng.uniform(-0.95, 0.95)
        x = np.array([ref.center + rho * np.cos(psi), rho * np.sin(psi)])
        kinetic = spec.E0 - eval_potential(spec, x)
        if kinetic > 0:
            break
    angle = rng.uniform(0.0, 2.0 * np.pi)
    speed = np.sqrt(kinetic)
    return PhasePoint((float(x[0]), float(x[1])), (float(speed * np.cos(angle)), float(speed * np.sin(angle))))


def sample_non_return(spec: PotentialSpec, n_samples: int = 200, seed: int = 0, t_max: float = 30.0,
                      escape_radius: float = 12.0, node_spacing: float = 0.02,
                      tol: float = 1e-8) -> NonReturnReport:
    """
    Integrates n_samples random energy-E0 states on supp V_ref and counts those
    that reach supp V_top and afterwards re-enter supp V_ref
    """
    if spec.vref_shape is None:
        raise ValidationError("non-return sampling needs a reflector", provenance="dynamics")
    rng = np.random.default_rng(seed)

    def escaped(t, y):
        return np.hypot(y[0], y[1]) - escape_radius
    escaped.terminal = True
    escaped.direction = 1

    report = NonReturnReport(n_samples=n_samples, n_touched=0, n_violations=0)
    grid = np.arange(0.0, t_max, node_spacing)
    for _ in range(n_samples):
        start = _sample_start(spec, rng)
        trajectory, _ = integrate_flow(spec, start, (0.0, t_max), tol=tol, atol=1e-10,
                                       t_eval=grid, events=[escaped])
        touched = np.array([in_top_support(spec, x) for x in trajectory.positions])
        if not np.any(touched):
            continue
        report.n_touched += 1
        first = int(np.argmax(touched))
        if any(in_reflector_support(spec, x) for x in trajectory.positions[first:]):
            report.n_violations += 1
            report.violations.append(start.as_array().tolist())

    logger.info(f"Non-return sampling: {report.n_touched}/{n_samples} reached V_top, "
                f"{report.n_violations} came back ({report.violation_fraction:.1%})")
    return report
