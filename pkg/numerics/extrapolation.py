"""
Limit extrapolation for exponentially converging sequences
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from errors import DomainError, NotConverging

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtrapolationResult:
    limit: float
    error: float
    n_samples: int


def _aitken(values: np.ndarray, floor: float) -> List[float]:
    accelerated = []
    for i in range(len(values) - 2):
        d1 = values[i + 1] - values[i]
        d2 = values[i + 2] - values[i + 1]
        denominator = d2 - d1
        if abs(denominator) <= floor:
            accelerated.append(float(values[i + 2]))
        else:
            accelerated.append(float(values[i + 2] - d2 * d2 / denominator))
    return accelerated


def limit_extrapolate(samples: Sequence[Tuple[float, float]], min_ratio: float = 1.5,
                      noise_floor: float = 1e-11) -> ExtrapolationResult:
    """
    Extrapolated limit of value(s) as |s| grows

    Samples are ordered by |s|. Successive Cauchy differences must shrink by
    `min_ratio` (differences below `noise_floor` relative to the values count as
    converged). The limit is the last Aitken Δ² value and the error estimate is
    the last Cauchy difference of the accelerated sequence.
    """
    if len(samples) < 4:
        raise DomainError(f"limit extrapolation needs at least 4 samples, got {len(samples)}")

    ordered = sorted(samples, key=lambda pair: abs(pair[0]))
    values = np.array([float(v) for _, v in ordered])
    if not np.all(np.isfinite(values)):
        raise DomainError("limit extrapolation received non-finite values")

    scale = float(np.max(np.abs(values)))
    floor = noise_floor * max(scale, np.finfo(float).tiny)
    differences = np.abs(np.diff(values))

    for i in range(len(differences) - 1):
        current, following = differences[i], differences[i + 1]
        if following <= floor:
            continue
        if current <= floor or following * min_ratio > current:
            raise NotConverging(
                f"Cauchy differences {current:.3e} -> {following:.3e} do not decrease by {min_ratio}"
            )

    accelerated = _aitken(values, floor)
    limit = accelerated[-1]
    error = abs(accelerated[-1] - accelerated[-2]) if len(accelerated) > 1 else float(differences[-1])
    logger.debug(f"Extrapolated limit {limit:.12g} ± {error:.2e} from {len(values)} samples")
    return ExtrapolationResult(limit=float(limit), error=float(error), n_samples=len(values))
