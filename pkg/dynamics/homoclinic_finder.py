"""
Homoclinic Finder Module
Shoots the unstable manifold Λ+ and keeps the curves that reach a brake point
(ξ = 0) on the reflector; each such curve retraces itself into Λ- and closes a
homoclinic trajectory
"""

import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from dynamics.flow import PhasePoint, Trajectory, integrate_flow, local_manifold_seed
from dynamics.potential import PotentialSpec
from errors import NoneFound, TangencyWarning, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShotResult:
    u: float
    reached_apex: bool
    apex_time: Optional[float] = None
    apex_state: Optional[np.ndarray] = None
    shooting_value: Optional[float] = None


@dataclass(frozen=True, eq=False)
class HomoclinicCandidate:
    """A refined brake orbit with its diagnostics"""

    u: float
    apex_time: float
    apex_state: np.ndarray
    mismatch: float
    transversality: float
    energy_error: float
    trajectory: Trajectory

    def summary(self) -> Dict:
        return {
            'label': self.trajectory.label,
            'u': self.u,
            'apex_x1': float(self.apex_state[0]),
            'apex_x2': float(self.apex_state[1]),
            'half_time': self.apex_time,
            'mismatch': self.mismatch,
            'transversality': self.transversality,
            'energy_error': self.energy_error,
        }


class HomoclinicFinder:
    """
    Brake-orbit shooting along Λ+

    Seeds (r_seed, u·r_seed^{λ2/λ1}) follow the curves of the linearized
    manifold. Each shot stops at the first outward apex relative to the
    reflector centre a, where the shooting function is the angular momentum
    (x - a) × ξ; it vanishes exactly when ξ = 0 there.
    """

    def __init__(self, spec: PotentialSpec, u_max: float = 12.0, r_seed: float = 5e-5,
                 seed_radius: float = 1e-4, scan_tol: float = 1e-8, refine_tol: float = 1e-10,
                 atol: float = 1e-12, escape_radius: float = 12.0, t_max: float = 60.0,
                 bisect_tol: float = 1e-13, match_tol: float = 1e-8, node_spacing: float = 5e-3,
                 r_link: float = 1e-3, return_span: float = 1.0, transversality_tol: float = 1e-3,
                 energy_tol: float = 1e-8, threads: int = 1):
        self.spec = spec.validate()
        self.u_max = u_max
        self.r_seed = r_seed
        self.seed_radius = seed_radius
        self.scan_tol = scan_tol
        self.refine_tol = refine_tol
        self.atol = atol
        self.escape_radius = escape_radius
        self.t_max = t_max
        self.bisect_tol = bisect_tol
        self.match_tol = match_tol
        self.node_spacing = node_spacing
        self.r_link = r_link
        self.return_span = return_span
        self.transversality_tol = transversality_tol
        self.energy_tol = energy_tol
        self.threads = max(1, int(threads))
        self.center = np.array([spec.vref_shape.center if spec.vref_shape is not None else 0.0, 0.0])

    @classmethod
    def from_settings(cls, spec: PotentialSpec, settings: Dict) -> 'HomoclinicFinder':
        keys = ('u_max', 'r_seed', 'seed_radius', 'scan_tol', 'refine_tol', 'atol', 'escape_radius',
                't_max', 'bisect_tol', 'match_tol', 'node_spacing', 'r_link', 'return_span',
                'transversality_tol', 'energy_tol', 'threads')
        return cls(spec, **{k: settings[k] for k in keys if k in settings})

    def _events(self):
        center, escape = self.center, self.escape_radius

        def apex(t, y):
            return (y[0] - center[0]) * y[2] + (y[1] - center[1]) * y[3]
        apex.terminal = True
        apex.direction = -1

        def escaped(t, y):
            return np.hypot(y[0], y[1]) - escape
        escaped.terminal = True
        escaped.direction = 1

        return [apex, escaped]

    def seed(self, u: float):
        exponent = self.spec.lambda2 / self.spec.lambda1
        return local_manifold_seed(self.spec, 'plus', (self.r_seed, u * self.r_seed ** exponent),
                                   self.seed_radius)

    def shooting_value(self, state: np.ndarray) -> float:
        """(x1 - a1)ξ2 - x2ξ1"""
        return float((state[0] - self.center[0]) * state[3] - (state[1] - self.center[1]) * state[2])

    def shoot(self, u: float, tol: Optional[float] = None, dense_output: bool = False):
        _, sol = integrate_flow(self.spec, self.seed(u), (0.0, self.t_max), tol=tol or self.scan_tol,
                                atol=self.atol, events=self._events(), dense_output=dense_output)
        if len(sol.t_events[0]) == 0:
            return ShotResult(u=float(u), reached_apex=False), sol
        state = sol.y_events[0][0]
        return ShotResult(u=float(u), reached_apex=True, apex_time=float(sol.t_events[0][0]),
                          apex_state=state, shooting_value=self.shooting_value(state)), sol

    def scan(self, n_shoot: int) -> List[ShotResult]:
        grid = np.linspace(-self.u_max, self.u_max, n_shoot)
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(lambda u: self.shoot(u)[0], grid))

    @staticmethod
    def brackets(shots: List[ShotResult], zero_tol: float = 1e-14) -> Tuple[List[float], List[Tuple[float, float]]]:
        """Grid points where the shooting value vanishes, and sign-change intervals"""
        exact = [s.u for s in shots if s.reached_apex and abs(s.shooting_value) <= zero_tol]
        intervals = []
        for left, right in zip(shots, shots[1:]):
            if not (left.reached_apex and right.reached_apex):
                continue
            if abs(left.shooting_value) <= zero_tol or abs(right.shooting_value) <= zero_tol:
                continue
            if np.sign(left.shooting_value) != np.sign(right.shooting_value):
                intervals.append((left.u, right.u))
        return exact, intervals

    def bisect(self, lo: float, hi: float) -> Optional[float]:
        low, _ = self.shoot(lo, self.refine_tol)
        high, _ = self.shoot(hi, self.refine_tol)
        if not (low.reached_apex and high.reached_apex):
            return None
        if np.sign(low.shooting_value) == np.sign(high.shooting_value):
            logger.warning(f"Bracket [{lo}, {hi}] lost its sign change at refinement accuracy")
            return None
        for _ in range(200):
            if high.u - low.u <= self.bisect_tol:
                break
            mid, _ = self.shoot(0.5 * (low.u + high.u), self.refine_tol)
            if not mid.reached_apex:
                logger.warning(f"Shot u={mid.u} escaped inside bracket [{lo}, {hi}]")
                return None
            if mid.shooting_value == 0:
                return mid.u
            if np.sign(mid.shooting_value) == np.sign(low.shooting_value):
                low = mid
            else:
                high = mid
        return low.u if abs(low.shooting_value) <= abs(high.shooting_value) else high.u

    def transversality(self, u: float, shot: ShotResult, du: float = 1e-6) -> float:
        """
        Angle at which the family of apex states crosses ξ = 0

        arctan of |dF/du| against the apex displacement |x - a||dx_apex/du|.
        """
        plus, _ = self.shoot(u + du, self.refine_tol)
        minus, _ = self.shoot(u - du, self.refine_tol)
        if not (plus.reached_apex and minus.reached_apex):
            return 0.0
        d_value = (plus.shooting_value - minus.shooting_value) / (2 * du)
        d_apex = np.hypot(*(plus.apex_state[:2] - minus.apex_state[:2])) / (2 * du)
        lever = np.hypot(*(shot.apex_state[:2] - self.center))
        return float(np.arctan2(abs(d_value), lever * d_apex))

    def close_orbit(self, shot: ShotResult, sol) -> Trajectory:
        """
        Homoclinic trajectory from an outgoing half ending at a brake point

        Time is shifted so the apex sits at t = 0; the return half is
        (x(-t), -ξ(-t)). Nodes are spaced node_spacing apart and truncated at
        r_link; the interpolant covers the seed-to-seed interval.
        """
        t_apex = shot.apex_time
        outgoing = sol.sol

        def interpolant(t: float) -> np.ndarray:
            if t <= 0:
                return outgoing(t + t_apex)
            state = np.array(outgoing(t_apex - t), dtype=float)
            state[2:] *= -1.0
            return state

        steps = np.arange(0.0, t_apex, self.node_spacing)
        back = outgoing(t_apex - steps).T
        keep = np.hypot(back[:, 0], back[:, 1]) >= self.r_link
        steps, back = steps[keep], back[keep]
        mirrored = back[1:].copy()
        mirrored[:, 2:] *= -1.0
        times = np.concatenate([-steps[::-1], steps[1:]])
        states = np.vstack([back[::-1], mirrored])
        energy = self.spec.E0
        return Trajectory(times=times, states=states, energy=energy, interpolant=interpolant,
                          start_time=-t_apex, end_time=t_apex)

    def return_mismatch(self, shot: ShotResult, sol, span: Optional[float] = None) -> float:
        """
        Largest phase-space distance between the flow continued past the apex
        and the reversed outgoing leg (x(t_apex - t), -ξ(t_apex - t)), over
        t in [0, min(span, t_apex)]
        """
        span = min(self.return_span if span is None else span, shot.apex_time)
        times = np.linspace(0.0, span, 41)
        _, continued = integrate_flow(self.spec, PhasePoint.from_array(shot.apex_state), (0.0, span),
                                      tol=self.refine_tol, atol=self.atol, t_eval=times)
        reversed_leg = np.array(sol.sol(shot.apex_time - times), dtype=float).T
        reversed_leg[:, 2:] *= -1.0
        return float(np.max(np.linalg.norm(continued.y.T - reversed_leg, axis=1)))

    def refine(self, u: float) -> Optional[HomoclinicCandidate]:
        shot, sol = self.shoot(u, self.refine_tol, dense_output=True)
        if not shot.reached_apex:
            return None
        mismatch = max(2.0 * float(np.hypot(*shot.apex_state[2:])), self.return_mismatch(shot, sol))
        if mismatch >= self.match_tol:
            logger.warning(f"Brake candidate u={u:.15g} rejected: return mismatch {mismatch:.2e}")
            return None
        angle = self.transversality(u, shot)
        if angle < self.transversality_tol:
            warnings.warn(f"Λ- and Λ+ meet at angle {angle:.2e} rad along u={u:.15g}", TangencyWarning)
        trajectory = self.close_orbit(shot, sol)
        energy_error = trajectory.max_energy_error(self.spec)
        if energy_error >= self.energy_tol:
            logger.warning(f"Homoclinic u={u:.6g} drifts {energy_error:.2e} off the energy shell")
        return HomoclinicCandidate(u=float(u), apex_time=shot.apex_time, apex_state=shot.apex_state,
                                   mismatch=mismatch, transversality=angle, energy_error=energy_error,
                                   trajectory=trajectory)

    def check_symmetry(self, candidates: List[HomoclinicCandidate], tol: float = 1e-6) -> bool:
        us = [c.u for c in candidates]
        unmatched = [u for u in us if not any(abs(u + v) <= tol * max(1.0, abs(u)) for v in us)]
        if unmatched:
            logger.warning(f"Symmetric potential but no mirror found for u={unmatched}")
        return not unmatched

    def find(self, n_shoot: int = 241) -> List[HomoclinicCandidate]:
        """Refined homoclinics ordered by u (lower, axis, upper)"""
        if n_shoot < 100:
            raise ValidationError(f"n_shoot must be at least 100, got {n_shoot}", provenance="dynamics")
        started = time.time()
        shots = self.scan(n_shoot)
        escaped = sum(not s.reached_apex for s in shots)
        exact, intervals = self.brackets(shots)
        logger.info(f"Scanned {n_shoot} rays: {escaped} escaped, {len(exact)} exact roots, "
                    f"{len(intervals)} sign changes")

        roots = list(exact)
        for lo, hi in intervals:
            root = self.bisect(lo, hi)
            if root is not None:
                roots.append(root)
        roots = sorted(roots)
        roots = [u for i, u in enumerate(roots) if i == 0 or u - roots[i - 1] > 1e-9]

        candidates = [c for c in (self.refine(u) for u in roots) if c is not None]
        if not candidates:
            raise NoneFound("no homoclinic trajectory found", provenance="dynamics")

        labelled = [replace(c, trajectory=replace(c.trajectory, label=f"gamma{k}"))
                    for k, c in enumerate(candidates, start=1)]
        if self.spec.symmetric:
            self.check_symmetry(labelled)
        logger.info(f"Found {len(labelled)} homoclinic trajectories in {time.time() - started:.1f}s")
        return labelled


def find_homoclinics(spec: PotentialSpec, n_shoot: int = 241, **settings) -> List[Trajectory]:
    """Homoclinic trajectories of energy E0, ordered lower / axis / upper"""
    finder = HomoclinicFinder.from_settings(spec, settings)
    return [c.trajectory for c in finder.find(n_shoot)]
