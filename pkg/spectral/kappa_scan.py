"""
Depth scan for the O(h) perturbation P + κhW

With δ = 0 the perturbed row factor e^{-iκw} no longer linearizes, and the
pseudo-resonance condition couples through e^{-iκw} - 1 instead of -iw.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from numerics.root_finding import ContourWindow
from spectral.pseudo_resonances import PseudoResonanceSolver
from spectral.quantization import QuantizationInput

logger = logging.getLogger(__name__)

COUPLING_FLOOR = 1e-12


def kappa_coupling(inp: QuantizationInput, kappa: float) -> complex:
    return complex(np.exp(-1j * kappa * inp.w) - 1.0)


def kappa_window(inp: QuantizationInput, re_min: float, re_max: float,
                 im_upper: float = 1.0) -> ContourWindow:
    """ζ-window from halfway to the first Γ pole up to im_upper"""
    lower = -inp.D0 - 0.25 * inp.lambda1
    return ContourWindow.from_bounds(re_min, re_max, lower, im_upper)


def kappa_depth_scan(inp: QuantizationInput, kappa_list: Sequence[float], h_list: Sequence[float],
                     re_min: float = -12.0, re_max: float = -4.0,
                     solver: Optional[PseudoResonanceSolver] = None) -> List[Dict]:
    """
    Leading and mean Im z/h of the pseudo-resonances for each (κ, h)

    Rows are ordered by κ then decreasing h.
    """
    solver = solver or PseudoResonanceSolver()
    rows = []
    for kappa in kappa_list:
        coupling = kappa_coupling(inp, kappa)
        for h in sorted(h_list, reverse=True):
            window = kappa_window(inp, re_min, re_max)
            if abs(coupling) < COUPLING_FLOOR:
                resonances = []
            else:
                resonances, _ = solver.solve_with_retry(inp, h, 0.0, window, coupling=coupling)
            depths = [r.depth_ratio for r in resonances]
            rows.append({
                'kappa': float(kappa),
                'h': float(h),
                'coupling_abs': abs(coupling),
                'count': len(resonances),
                'leading_depth_ratio': max(depths) if depths else None,
                'mean_depth_ratio': float(np.mean(depths)) if depths else None,
            })
            logger.debug(f"κ={kappa}, h={h:.3e}: {len(resonances)} pseudo-resonances")
    return rows
