"""
Synthetic Invariants Module
Quantization inputs supplied directly as invariants, the Case (I)/(II)
relations, and the admissible h-sets on which μ vanishes
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from dynamics.invariants import HomoclinicDatum
from errors import CaseMismatch, ConfigError
from spectral.quantization import QuantizationInput

logger = logging.getLogger(__name__)

CASE_TOLERANCE = 1e-8
SQRT7 = float(np.sqrt(7.0))


def datum_from_record(record: Dict, lambda1: float, lambda2: float) -> HomoclinicDatum:
    """
    HomoclinicDatum from a synthetic record

    Required keys: index, action_A, maslov_nu, g_plus, g_minus, M_plus, M_minus.
    Optional: w (default 0). B and T are evaluated from the rest.
    """
    required = ('index', 'action_A', 'maslov_nu', 'g_plus', 'g_minus', 'M_plus', 'M_minus')
    missing = [key for key in required if key not in record]
    if missing:
        raise ConfigError(f"synthetic record {record.get('index', '?')} lacks {missing}")
    return HomoclinicDatum.build(
        index=record['index'],
        action_A=record['action_A'],
        maslov_nu=record['maslov_nu'],
        g_plus=record['g_plus'],
        g_minus=record['g_minus'],
        M_plus=record['M_plus'],
        M_minus=record['M_minus'],
        lambda1=lambda1,
        lambda2=lambda2,
        w_integral=record.get('w', 0.0),
    )


def input_from_records(records: Sequence[Dict], lambda1: float, lambda2: float, E0: float,
                       perturbed_index: int = 1) -> QuantizationInput:
    data = [datum_from_record(record, lambda1, lambda2) for record in records]
    inp = QuantizationInput(data=tuple(data), lambda1=lambda1, lambda2=lambda2, E0=E0,
                            source='synthetic', perturbed_index=perturbed_index)
    issues = inp.problems()
    if issues:
        raise ConfigError("; ".join(issues))
    return inp


def _record(index: int, action: float, M_plus: float = 1.0, nu: int = 0, w: float = 0.0,
            g_norm: float = SQRT7) -> Dict:
    return {
        'index': index,
        'action_A': action,
        'maslov_nu': nu,
        'g_plus': [g_norm, 0.0],
        'g_minus': [g_norm, 0.0],
        'M_plus': M_plus,
        'M_minus': 1.0,
        'w': w,
    }


def case_II_records(w: float = 2.0) -> List[Dict]:
    """A1 = A2 = A3, equal T, B3 = B1 and B2 = -2B1 (ν2 = 2 flips the sign)"""
    return [
        _record(1, 1.0, w=w),
        _record(2, 1.0, M_plus=2.0, nu=2),
        _record(3, 1.0),
    ]


def case_I_records(w: float = 2.0) -> List[Dict]:
    """A1 = A3, A2 - A1 = π, equal T, B3 = B1 and B2 = 2B1 (ν = 0)"""
    return [
        _record(1, 1.0, w=w),
        _record(2, 1.0 + np.pi, M_plus=2.0),
        _record(3, 1.0),
    ]


def generic_records(w: float = 2.0) -> List[Dict]:
    """Three unrelated trajectories: no cancellation in μ"""
    return [
        _record(1, 0.7, M_plus=1.3, nu=1, w=w, g_norm=2.1),
        _record(2, 1.3, M_plus=0.8, nu=0, g_norm=2.9),
        _record(3, 2.1, M_plus=1.7, nu=3, g_norm=2.5),
    ]


def reference_input(case: str = 'II', w: float = 2.0, lambda1: float = 1.0, lambda2: float = 1.5,
                    E0: float = 1.0) -> QuantizationInput:
    """Synthetic reference inputs: 'I', 'II' or 'generic'"""
    builders = {'I': case_I_records, 'II': case_II_records, 'generic': generic_records}
    if case not in builders:
        raise ConfigError(f"unknown synthetic reference '{case}'")
    return input_from_records(builders[case](w), lambda1, lambda2, E0)


def _close(a: complex, b: complex, scale: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(scale, 1.0)


def check_case(inp: QuantizationInput, case: str, tol: float = CASE_TOLERANCE) -> Optional[float]:
    """
    Verifies the Case (I) or (II) relations; returns ν for Case (I)

    Case (I): A1 = A3 < A2, T1 = T2 = T3, B1 = B3 and 2B1 = B2 e^{iν}.
    Case (II): A1 = A2 = A3, T1 = T2 = T3, B1 = B3 and B2 = -2B1.
    """
    if case not in ('I', 'II'):
        raise CaseMismatch(f"unknown case '{case}'")
    if inp.K != 3:
        raise CaseMismatch(f"Case ({case}) needs K = 3 trajectories, got {inp.K}")

    d1, d2, d3 = inp.data
    B1, B2, B3 = d1.amplitude_B, d2.amplitude_B, d3.amplitude_B
    b_scale = abs(B1)
    failures = []
    if not _close(d1.action_A, d3.action_A, abs(d1.action_A), tol):
        failures.append("A1 ≠ A3")
    if not (_close(d1.time_T, d2.time_T, abs(d1.time_T), tol) and _close(d1.time_T, d3.time_T, abs(d1.time_T), tol)):
        failures.append("T1, T2, T3 differ")
    if abs(B1 - B3) > tol * b_scale:
        failures.append("B1 ≠ B3")

    nu = None
    if case == 'II':
        if not _close(d1.action_A, d2.action_A, abs(d1.action_A), tol):
            failures.append("A1 ≠ A2")
        if abs(B2 + 2.0 * B1) > tol * b_scale:
            failures.append("B2 ≠ -2B1")
    else:
        if not d2.action_A > d1.action_A:
            failures.append("A2 must exceed A1")
        ratio = 2.0 * B1 / B2
        if abs(abs(ratio) - 1.0) > tol:
            failures.append("|B2| ≠ 2|B1|")
        nu = float(np.angle(ratio))
        if nu == -np.pi:
            nu = float(np.pi)

    if failures:
        raise CaseMismatch(f"Case ({case}) relations fail: {', '.join(failures)}")
    return nu


def admissible_h_set(inp: QuantizationInput, case: str, j_max: int = 20, m_min: int = 1,
                     m_max: int = 17) -> List[float]:
    """
    h values on which μ(·, h) vanishes identically

    Case (I): (A2 - A1)/((2j+1)π + ν), j = 0..j_max, kept in (0, 1].
    Case (II): every h in (0, 1]; represented by the grid 2^{-m}, m_min..m_max.
    """
    nu = check_case(inp, case)
    if case == 'II':
        return [2.0 ** (-m) for m in range(m_min, m_max + 1)]

    gap = inp.data[1].action_A - inp.data[0].action_A
    hset = []
    for j in range(j_max + 1):
        denominator = (2 * j + 1) * np.pi + nu
        if denominator <= 0:
            continue
        h = gap / denominator
        if 0 < h <= 1.0 + 1e-12:
            hset.append(float(min(h, 1.0)))
    logger.debug(f"Case (I) admissible set with {len(hset)} values, ν={nu:.3e}")
    return hset
