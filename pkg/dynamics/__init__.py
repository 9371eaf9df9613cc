"""
Dynamics Module
Classical system of the barrier-top potential: flow, homoclinic trajectories
and their invariants
"""

from .potential import (
    BarrierShape,
    BumpShape,
    PotentialSpec,
    ReflectorShape,
    eval_gradient,
    eval_hessian,
    eval_perturbation,
    eval_potential,
)
from .flow import (
    PhasePoint,
    Trajectory,
    hamiltonian_field,
    integrate_flow,
    local_manifold_seed,
    symbol,
    trajectory_to_frame,
)
from .invariants import (
    GVectorFit,
    HomoclinicDatum,
    amplitude_B,
    assemble_invariants,
    compute_action,
    compute_M_limits,
    fit_g_vectors,
    jacobian_limit,
    period_T,
    w_integral,
)
from .homoclinic_finder import HomoclinicCandidate, HomoclinicFinder, find_homoclinics
from .non_return import NonReturnReport, sample_non_return

__all__ = [
    'BarrierShape', 'BumpShape', 'PotentialSpec', 'ReflectorShape',
    'eval_gradient', 'eval_hessian', 'eval_perturbation', 'eval_potential',
    'PhasePoint', 'Trajectory', 'hamiltonian_field', 'integrate_flow', 'local_manifold_seed',
    'symbol', 'trajectory_to_frame',
    'GVectorFit', 'HomoclinicDatum', 'amplitude_B', 'assemble_invariants', 'compute_action',
    'compute_M_limits', 'fit_g_vectors', 'jacobian_limit', 'period_T', 'w_integral',
    'HomoclinicCandidate', 'HomoclinicFinder', 'find_homoclinics',
    'NonReturnReport', 'sample_non_return',
]
