"""
Spectral Module
Quantization matrices, pseudo-resonances and the instability report
"""

from .quantization import (
    QuantizationInput,
    QuantizationMatrix,
    RescaledParameter,
    build_Q,
    build_Q_tilde,
    mu,
    quantization_function,
    rescaled_S,
    wq_eigenvalues,
)
from .pseudo_resonances import (
    PseudoResonance,
    PseudoResonanceSolver,
    lattice_z_q,
    mu_tilde,
    pseudo_resonances_in_window,
    quantization_function_local,
)
from .synthetic import admissible_h_set, check_case, input_from_records, reference_input
from .resolvent import ResolventEstimate, resolvent_surrogate
from .instability_report import InstabilityAnalysis, InstabilityReport, WindowParams, instability_report
from .kappa_scan import kappa_depth_scan

__all__ = [
    'QuantizationInput', 'QuantizationMatrix', 'RescaledParameter',
    'build_Q', 'build_Q_tilde', 'mu', 'quantization_function', 'rescaled_S', 'wq_eigenvalues',
    'PseudoResonance', 'PseudoResonanceSolver', 'lattice_z_q', 'mu_tilde',
    'pseudo_resonances_in_window', 'quantization_function_local',
    'admissible_h_set', 'check_case', 'input_from_records', 'reference_input',
    'ResolventEstimate', 'resolvent_surrogate',
    'InstabilityAnalysis', 'InstabilityReport', 'WindowParams', 'instability_report',
    'kappa_depth_scan',
]
