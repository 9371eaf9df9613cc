"""
Resolvent Surrogate Module
Norms of (1 - h^{S/λ1-1/2}𝒬)^{-1} and of its perturbed counterpart
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from errors import SingularMatrix
from spectral.pseudo_resonances import PseudoResonance
from spectral.quantization import QuantizationInput, build_Q, build_Q_tilde, h_power

logger = logging.getLogger(__name__)

SINGULAR_DISTANCE = 1e-3


@dataclass(frozen=True)
class ResolventEstimate:
    norm: float
    bound: float
    condition: float
    perturbed: bool
    identity_norm: Optional[float] = None
    identity_gap: Optional[float] = None

    @property
    def ratio(self) -> float:
        """norm / bound"""
        return self.norm / self.bound

    @property
    def relative_identity_gap(self) -> Optional[float]:
        """Entrywise gap between the inverse and 1 + X, relative to (1 + ‖X‖)²"""
        if self.identity_gap is None:
            return None
        return self.identity_gap / (1.0 + (self.identity_norm or 0.0)) ** 2


def resolvent_bound(inp: QuantizationInput, z: complex, h: float, delta: Optional[float] = None,
                    perturbed: bool = False) -> float:
    """max(1, h^{λ2/(2λ1) + Im z/(λ1h)}) unperturbed, h^{-δ} perturbed"""
    if perturbed:
        return float(h ** (-delta))
    exponent = inp.lambda2 / (2.0 * inp.lambda1) + (complex(z) - inp.E0).imag / (inp.lambda1 * h)
    return float(max(1.0, h ** exponent))


def resolvent_surrogate(inp: QuantizationInput, z: complex, h: float, delta: Optional[float] = None,
                        perturbed: bool = False,
                        resonances: Optional[Sequence[PseudoResonance]] = None) -> ResolventEstimate:
    """
    Operator norm of (1 - h^{S/λ1-1/2}𝒬)^{-1}, or of the 𝒬̃ version when perturbed

    Unperturbed, the inverse is also formed through the nilpotent identity
    (1 - X)^{-1} = 1 + X and the entrywise gap between the two is reported.
    """
    ell = -np.log(h)
    if perturbed and resonances:
        nearest = min(abs(complex(z) - r.z) for r in resonances)
        if nearest < SINGULAR_DISTANCE * h / ell:
            raise SingularMatrix(f"z={z} lies {nearest:.2e} from a pseudo-resonance")

    q = build_Q_tilde(inp, z, h, delta) if perturbed else build_Q(inp, z, h)
    x = h_power(inp, z, h) * q.entries
    identity = np.eye(inp.K, dtype=np.complex128)
    system = identity - x

    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
        raise SingularMatrix(f"1 - h^(S/λ1-1/2)Q is singular at z={z} (cond={condition:.2e})")

    inverse = linalg.inv(system)
    norm = float(linalg.norm(inverse, 2))
    bound = resolvent_bound(inp, z, h, delta, perturbed)

    if perturbed:
        return ResolventEstimate(norm=norm, bound=bound, condition=condition, perturbed=True)

    nilpotent_inverse = identity + x
    gap = float(np.max(np.abs(inverse - nilpotent_inverse)))
    return ResolventEstimate(norm=norm, bound=bound, condition=condition, perturbed=False,
                             identity_norm=float(linalg.norm(x, 2)), identity_gap=gap)
