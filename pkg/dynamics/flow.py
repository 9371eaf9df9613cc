"""
Hamiltonian Flow Module
Phase points, trajectories and the adaptive integration of H_p = 2ξ·∂x - ∇V·∂ξ
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from dynamics.potential import PotentialSpec, eval_gradient, eval_hessian, eval_potential
from errors import DomainError, OffsetTooLarge, StepFailure

logger = logging.getLogger(__name__)

SEED_RADIUS = 1e-4
TRAJECTORY_COLUMNS = ['t', 'x1', 'x2', 'xi1', 'xi2']


@dataclass(frozen=True)
class PhasePoint:
    x: Tuple[float, float]
    xi: Tuple[float, float]

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise DomainError(f"phase point has non-finite components: x={self.x}, ξ={self.xi}")

    @classmethod
    def from_array(cls, state: Sequence[float]) -> 'PhasePoint':
        return cls((float(state[0]), float(state[1])), (float(state[2]), float(state[3])))

    def as_array(self) -> np.ndarray:
        return np.array([self.x[0], self.x[1], self.xi[0], self.xi[1]], dtype=float)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled Hamiltonian curve; states rows are (x1, x2, ξ1, ξ2)

    `interpolant`, when present, evaluates the state at any time in
    [start_time, end_time], which may extend beyond the stored nodes.
    """

    times: np.ndarray
    states: np.ndarray
    energy: float
    label: str = ''
    interpolant: Optional[Callable[[float], np.ndarray]] = None
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float).reshape(len(times), 4)
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        times.flags.writeable = False
        states.flags.writeable = False
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'states', states)
        if self.start_time is None and len(times):
            object.__setattr__(self, 'start_time', float(times[0]))
        if self.end_time is None and len(times):
            object.__setattr__(self, 'end_time', float(times[-1]))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def momenta(self) -> np.ndarray:
        return self.states[:, 2:]

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.states[:, 0], self.states[:, 1])

    def point(self, i: int) -> PhasePoint:
        return PhasePoint.from_array(self.states[i])

    def state_at(self, t: float) -> np.ndarray:
        if self.interpolant is None:
            return np.array([np.interp(t, self.times, self.states[:, j]) for j in range(4)])
        return np.asarray(self.interpolant(t), dtype=float)

    def energy_errors(self, spec: PotentialSpec) -> np.ndarray:
        return np.array([symbol(spec, s) - self.energy for s in self.states])

    def max_energy_error(self, spec: PotentialSpec) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.max(np.abs(self.energy_errors(spec))))


def symbol(spec: PotentialSpec, state: Sequence[float]) -> float:
    """p(x, ξ) = ξ² + V(x)"""
    return float(state[2] ** 2 + state[3] ** 2 + eval_potential(spec, state[:2]))


def _field(spec: PotentialSpec, state: np.ndarray) -> np.ndarray:
    grad = eval_gradient(spec, state[:2])
    return np.array([2.0 * state[2], 2.0 * state[3], -grad[0], -grad[1]])


def hamiltonian_field(spec: PotentialSpec, p: PhasePoint) -> np.ndarray:
    """(2ξ, -∇V(x))"""
    return _field(spec, p.as_array())


def linearized_field(spec: PotentialSpec, x: Sequence[float]) -> np.ndarray:
    """Jacobian of H_p at position x: [[0, 2I], [-Hess V, 0]]"""
    matrix = np.zeros((4, 4))
    matrix[0, 2] = matrix[1, 3] = 2.0
    matrix[2:, :2] = -eval_hessian(spec, x)
    return matrix


def integrate_flow(spec: PotentialSpec, start: PhasePoint, t_span: Tuple[float, float],
                   tol: float = 1e-10, atol: float = 1e-12, t_eval: Optional[np.ndarray] = None,
                   events: Optional[List[Callable]] = None, dense_output: bool = False):
    """
    Integrates exp(tH_p) from `start` with the RK45 embedded pair

    Returns (Trajectory, solver result); the trajectory holds the t_eval nodes
    (or the accepted steps) and, with dense_output, an interpolant.
    """
    if tol <= 0:
        raise DomainError(f"integration tolerance must be positive, got {tol}")

    sol = solve_ivp(lambda t, y: _field(spec, y), t_span, start.as_array(), method='RK45',
                    rtol=tol, atol=atol, t_eval=t_eval, events=events, dense_output=dense_output)
    if sol.status == -1:
        raise StepFailure(f"integration from {start} failed: {sol.message}")

    times, states = sol.t, sol.y.T
    if t_span[1] < t_span[0]:
        times, states = times[::-1], states[::-1]
    trajectory = Trajectory(
        times=times,
        states=states,
        energy=symbol(spec, start.as_array()),
        interpolant=sol.sol if dense_output else None,
        start_time=float(min(t_span[0], sol.t[-1])),
        end_time=float(max(t_span[0], sol.t[-1])),
    )
    return trajectory, sol


def local_manifold_seed(spec: PotentialSpec, side: str, offset: Sequence[float],
                        seed_radius: float = SEED_RADIUS) -> PhasePoint:
    """
    Point of Λ± over `offset` from the quadratic generating function

    ξ = ±(λ1 x1/2, λ2 x2/2).
    """
    if side not in ('plus', 'minus'):
        raise DomainError(f"side must be 'plus' or 'minus', got '{side}'")
    offset = np.asarray(offset, dtype=float)
    if np.hypot(*offset) > seed_radius:
        raise OffsetTooLarge(f"|offset| = {np.hypot(*offset):.3e} exceeds seed radius {seed_radius:.1e}")
    sign = 1.0 if side == 'plus' else -1.0
    xi = sign * np.array([spec.lambda1 * offset[0] / 2.0, spec.lambda2 * offset[1] / 2.0])
    return PhasePoint((float(offset[0]), float(offset[1])), (float(xi[0]), float(xi[1])))


def trajectory_to_frame(traj: Trajectory) -> pd.DataFrame:
    """Columns t, x1, x2, xi1, xi2"""
    frame = pd.DataFrame(traj.states, columns=TRAJECTORY_COLUMNS[1:])
    frame.insert(0, 't', traj.times)
    return frame
