"""
Instability Report Module
Compares the unperturbed and perturbed quantization problems over a sequence
of h values: resonance-free depth, pseudo-resonance depths and counts, and the
quantum-trapping proxies
"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ValidationError
from spectral.pseudo_resonances import (
    PseudoResonance,
    PseudoResonanceSolver,
    local_window,
    nominal_depth,
)
from spectral.quantization import QuantizationInput, build_Q
from spectral.resolvent import resolvent_surrogate

logger = logging.getLogger(__name__)

CERTIFICATE_LABEL = "surrogate certificate"


@dataclass(frozen=True)
class WindowParams:
    """Window E0 + [A h, B h] + i[lower, im_upper h]; C sets the lower margin C h/|ln h|"""

    C: float = 12.0
    A: float = -12.0
    B: float = -4.0
    im_upper: float = 1.0

    def validate(self) -> 'WindowParams':
        if not (-self.C <= self.A < self.B <= self.C):
            raise ValidationError(f"window needs -C <= A < B <= C, got C={self.C}, A={self.A}, B={self.B}",
                                  provenance="spectral")
        if self.im_upper <= 0:
            raise ValidationError("window upper edge must lie above the real axis", provenance="spectral")
        return self


def trapping_proxies(depth_ratios: Sequence[float], n_exceptions: int = 2) -> Tuple[float, float]:
    """
    (qt, ess-qt) proxies from the Im z/h values of a finite resonance set

    qt is the largest h/|Im z|; ess-qt discards the n_exceptions largest values.
    Both are 0 when too few resonances are available.
    """
    lifetimes = sorted((1.0 / abs(d) for d in depth_ratios if d != 0), reverse=True)
    qt = lifetimes[0] if lifetimes else 0.0
    ess = lifetimes[n_exceptions] if len(lifetimes) > n_exceptions else 0.0
    return float(qt), float(ess)


def trapping_lower_bound(inp: QuantizationInput, delta: float, alpha: float) -> float:
    """(α - δλ1) / ((D0 + α)(D0 + δλ1)), D0 = λ2/2"""
    d0 = inp.D0
    return float((alpha - delta * inp.lambda1) / ((d0 + alpha) * (d0 + delta * inp.lambda1)))


@dataclass
class InstabilityReport:
    h_list: List[float]
    delta: float
    alpha: float
    lambda1: float
    lambda2: float
    E0: float
    D0: float
    n_exceptions: int
    window: Dict
    unperturbed_depth: List[float]
    perturbed_depths: List[List[float]]
    counts: List[int]
    certificates: List[Dict]
    per_h: List[Dict]
    qt_proxy: float
    ess_qt_proxy: float
    unperturbed_ess_qt_bound: float
    trapping_increase: float
    trapping_bound: float
    depth_constant: Optional[float]
    hset: List[float]
    resonances: List[PseudoResonance] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict:
        record = asdict(self)
        record.pop('resonances')
        return record

    def resonance_rows(self) -> List[Dict]:
        return [r.to_row() for r in self.resonances]


class InstabilityAnalysis:
    """Per-h analysis of P versus P + h^{1+δ}W at the matrix-surrogate level"""

    def __init__(self, solver: Optional[PseudoResonanceSolver] = None, n_exceptions: int = 2,
                 certificate_grid: Tuple[int, int] = (9, 5), certificate_tol: float = 1e-10):
        self.solver = solver or PseudoResonanceSolver()
        self.n_exceptions = n_exceptions
        self.certificate_grid = certificate_grid
        self.certificate_tol = certificate_tol

    @staticmethod
    def check_parameters(inp: QuantizationInput, delta: float, alpha: float) -> None:
        if not 0 < delta < 0.5:
            raise ValidationError(f"δ must lie in (0, 1/2), got {delta}", provenance="spectral")
        if not 0 < alpha < 0.5 * inp.lambda1:
            raise ValidationError(f"α must lie in (0, λ1/2), got {alpha}", provenance="spectral")
        if alpha <= delta * inp.lambda1:
            logger.warning(f"α={alpha} does not exceed δλ1={delta * inp.lambda1}; no trapping increase expected")

    def certify_unperturbed(self, inp: QuantizationInput, h: float, alpha: float,
                            window: WindowParams) -> Dict:
        """
        Matrix-level check that the unperturbed surrogate has no pole down to depth (D0 + α)h

        On a grid of the window: ‖𝒬²‖/‖𝒬‖² and the gap between the direct inverse
        of 1 - X and 1 + X must both vanish.
        """
        n_re, n_im = self.certificate_grid
        depth_ratio = inp.D0 + alpha
        nilpotency, gaps, minors = [], [], []
        for re in np.linspace(window.A, window.B, n_re):
            for im in np.linspace(-depth_ratio, window.im_upper, n_im):
                z = inp.E0 + h * complex(re, im)
                q = build_Q(inp, z, h)
                nilpotency.append(q.nilpotency_ratio())
                minors.append(q.max_minor_ratio())
                gaps.append(resolvent_surrogate(inp, z, h).relative_identity_gap)
        certificate = {
            'label': CERTIFICATE_LABEL,
            'depth': depth_ratio * h,
            'depth_ratio': depth_ratio,
            'max_nilpotency_ratio': float(max(nilpotency)),
            'max_identity_gap': float(max(gaps)),
            'max_minor_ratio': float(max(minors)),
        }
        certificate['pole_free'] = bool(
            certificate['max_nilpotency_ratio'] < self.certificate_tol
            and certificate['max_identity_gap'] < self.certificate_tol
        )
        if not certificate['pole_free']:
            logger.warning(f"Unperturbed surrogate not certified at h={h:.3e}: "
                           f"nilpotency {certificate['max_nilpotency_ratio']:.2e}")
        return certificate

    def analyze_h(self, inp: QuantizationInput, h: float, delta: float, alpha: float,
                  window: WindowParams) -> Dict:
        """Certificate, perturbed pseudo-resonances and trapping proxies at one h"""
        started = time.time()
        ell = -np.log(h)
        zeta_window = local_window(inp, h, delta, window.A, window.B, window.C, window.im_upper)
        resonances, used = self.solver.solve_with_retry(inp, h, delta, zeta_window)

        depths = [r.depth_ratio for r in resonances]
        nominal = nominal_depth(inp, delta)
        qt, ess = trapping_proxies(depths, self.n_exceptions)
        result = {
            'h': float(h),
            'log_h': float(ell),
            'unperturbed_depth': (inp.D0 + alpha) * h,
            'certificate': self.certify_unperturbed(inp, h, alpha, window),
            'count': len(resonances),
            'perturbed_depths': [r.z.imag for r in resonances],
            'depth_ratios': depths,
            'leading_depth_ratio': max(depths) if depths else None,
            'mean_depth_ratio': float(np.mean(depths)) if depths else None,
            'depth_shift': float(-np.mean(depths) - inp.D0) if depths else None,
            'depth_constant': float(max(abs(d + nominal) * ell for d in depths)) if depths else None,
            'qt_proxy': qt,
            'ess_qt_proxy': ess,
            'window': {'re_min': used.re_min, 're_max': used.re_max,
                       'im_min': used.im_min, 'im_max': used.im_max},
            'resonances': resonances,
        }
        logger.info(f"h={h:.3e}: {len(resonances)} pseudo-resonances, ess-qt proxy {ess:.4f} "
                    f"({time.time() - started:.2f}s)")
        return result

    def summarize(self, inp: QuantizationInput, delta: float, alpha: float, window: WindowParams,
                  results: Sequence[Dict], hset: Optional[Sequence[float]] = None) -> InstabilityReport:
        """Assembles the report from per-h results, ordered by decreasing h"""
        ordered = sorted(results, key=lambda r: -r['h'])
        smallest = ordered[-1]
        constants = [r['depth_constant'] for r in ordered if r['depth_constant'] is not None]
        unperturbed_ess = 1.0 / (inp.D0 + alpha)
        per_h = [{k: v for k, v in r.items() if k not in ('resonances', 'certificate')} for r in ordered]
        resonances = [res for r in ordered for res in r['resonances']]

        return InstabilityReport(
            h_list=[r['h'] for r in ordered],
            delta=float(delta),
            alpha=float(alpha),
            lambda1=inp.lambda1,
            lambda2=inp.lambda2,
            E0=inp.E0,
            D0=inp.D0,
            n_exceptions=self.n_exceptions,
            window=asdict(window),
            unperturbed_depth=[r['unperturbed_depth'] for r in ordered],
            perturbed_depths=[r['perturbed_depths'] for r in ordered],
            counts=[r['count'] for r in ordered],
            certificates=[r['certificate'] for r in ordered],
            per_h=per_h,
            qt_proxy=smallest['qt_proxy'],
            ess_qt_proxy=smallest['ess_qt_proxy'],
            unperturbed_ess_qt_bound=unperturbed_ess,
            trapping_increase=smallest['ess_qt_proxy'] - unperturbed_ess,
            trapping_bound=trapping_lower_bound(inp, delta, alpha),
            depth_constant=max(constants) if constants else None,
            hset=[float(h) for h in (hset if hset is not None else [r['h'] for r in ordered])],
            resonances=resonances,
        )

    def run(self, inp: QuantizationInput, delta: float, alpha: float, h_list: Sequence[float],
            window: WindowParams, hset: Optional[Sequence[float]] = None) -> InstabilityReport:
        self.check_parameters(inp, delta, alpha)
        window.validate()
        results = [self.analyze_h(inp, h, delta, alpha, window) for h in h_list]
        return self.summarize(inp, delta, alpha, window, results, hset)


def instability_report(inp: QuantizationInput, delta: float, alpha: float, h_list: Sequence[float],
                       window_params: WindowParams,
                       solver: Optional[PseudoResonanceSolver] = None) -> InstabilityReport:
    return InstabilityAnalysis(solver).run(inp, delta, alpha, h_list, window_params)


def depth_plot_series(report: InstabilityReport, n_points: int = 50) -> Dict[str, List[Dict]]:
    """
    Columnar plot data: the two depth lines -(D0+α)h and -(D0+δλ1)h over
    Re z ∈ E0 + [A h, B h], and the pseudo-resonance markers
    """
    lines = []
    perturbed_ratio = report.D0 + report.delta * report.lambda1
    for h in report.h_list:
        for re in np.linspace(report.window['A'], report.window['B'], n_points):
            lines.append({
                'h': h,
                're_z': report.E0 + re * h,
                'unperturbed_line': -(report.D0 + report.alpha) * h,
                'perturbed_line': -perturbed_ratio * h,
            })
    markers = [{'h': r.h, 're_z': r.z.real, 'im_z': r.z.imag, 'q': r.q} for r in report.resonances]
    return {'depth_lines': lines, 'markers': markers}
