"""Sparse vector technique for adaptively chosen sensitivity-1 threshold queries.

Queries arrive already evaluated; the comparison threshold is 0 and is folded
into the query by the caller.
"""

from __future__ import annotations

import math

from .noise import as_noise_source

ABOVE = "Above"
BELOW = "Below"


class SparseVector:
    """rho-zCDP sparse vector with a cutoff of ``cutoff`` Above answers."""

    def __init__(self, rho: float, cutoff: int, noise=None):
        if rho <= 0:
            raise ValueError("rho must be positive")
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        self.rho = rho
        self.cutoff = cutoff
        self.epsilon = math.sqrt(2 * rho)
        self.noise = as_noise_source(noise)
        self.threshold_noise = float(self.noise.laplace(2 / self.epsilon))
        self.query_scale = 4 * cutoff / self.epsilon
        self.above_count = 0
        self.queries = 0

    @property
    def exhausted(self) -> bool:
        return self.above_count >= self.cutoff

    def query(self, value: float) -> str:
        self.queries += 1
        z = float(self.noise.laplace(self.query_scale))
        if value + z >= self.threshold_noise and self.above_count < self.cutoff:
            self.above_count += 1
            return ABOVE
        return BELOW

    def answer_all(self, values) -> list[str]:
        return [self.query(v) for v in values]


def svt_gamma(cutoff: int, k: float, beta: float, rho: float) -> float:
    """Accuracy radius 8c(ln k + ln(2c/beta)) / sqrt(2 rho) of the sparse vector answers."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if cutoff <= 0 or k < 1 or rho <= 0:
        raise ValueError("cutoff, k and rho must be positive (k >= 1)")
    return 8 * cutoff * (math.log(k) + math.log(2 * cutoff / beta)) / math.sqrt(2 * rho)


def gamma_violations(values, answers, gamma: float, cutoff: int) -> int:
    """Count answers that break gamma-accuracy among those given before the cutoff was hit.

    Answers after the cutoff-th Above are forced Below and are not checked.
    """
    bad = 0
    seen = 0
    for v, a in zip(values, answers):
        if seen >= cutoff:
            break
        if a == ABOVE:
            seen += 1
            bad += v < -gamma
        else:
            bad += v > gamma
    return int(bad)
