"""Noise samplers, the binary-tree noise variable, and zCDP bookkeeping.

Tree depths use base-2 logs.  Privacy conversions use natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


# -- noise sources ---------------------------------------------------------------

class NoiseSource:
    """Seeded Gaussian/Laplace sampler.  One owner at a time."""

    zeroed = False

    def __init__(self, seed=None):
        self._seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self.rng = np.random.default_rng(self._seq)

    def gaussian(self, sigma: float, size=None):
        return self.rng.normal(0.0, sigma, size)

    def laplace(self, scale: float, size=None):
        return self.rng.laplace(0.0, scale, size)

    def spawn(self, n: int) -> list["NoiseSource"]:
        """Independent child sources; the split depends only on the seed and n."""
        return [NoiseSource(s) for s in self._seq.spawn(n)]


class ZeroNoise(NoiseSource):
    """Test hook: every draw is exactly 0."""

    zeroed = True

    def __init__(self, seed=None):
        pass

    def gaussian(self, sigma, size=None):
        return 0.0 if size is None else np.zeros(size)

    def laplace(self, scale, size=None):
        return 0.0 if size is None else np.zeros(size)

    def spawn(self, n):
        return [ZeroNoise() for _ in range(n)]


def as_noise_source(noise) -> NoiseSource:
    if isinstance(noise, NoiseSource):
        return noise
    return NoiseSource(noise)


# -- binary tree -----------------------------------------------------------------------

def padded_horizon(T: int) -> int:
    """Smallest power of two >= T."""
    if T < 1:
        raise ValueError("horizon must be positive")
    return 1 << (T - 1).bit_length()


def tree_levels(T: int) -> int:
    """log2(T_pad) + 1."""
    return padded_horizon(T).bit_length()


def dyadic_decomposition(t: int) -> list[tuple[int, int]]:
    """Split (0, t] into intervals whose sizes are the binary digits of t, largest first."""
    if t < 1:
        raise ValueError("t must be >= 1")
    out = []
    start = 0
    for level in range(t.bit_length() - 1, -1, -1):
        if t >> level & 1:
            out.append((start, start + (1 << level)))
            start += 1 << level
    return out


class BinaryTreeNoise:
    """The binary-tree random variable Z over T_pad leaves.

    ``nodes[l][i]`` is the Gaussian attached to the node ((i)*2^l, (i+1)*2^l]
    (0-based i).  Z[t] sums the nodes of the dyadic decomposition of (0, t].
    """

    def __init__(self, T: int, rho_node: float, noise=None):
        if rho_node <= 0:
            raise ValueError("rho_node must be positive")
        self.T = T
        self.T_pad = padded_horizon(T)
        self.rho_node = rho_node
        self.depth = tree_levels(T)
        src = as_noise_source(noise)
        flat = np.asarray(src.gaussian(1.0 / math.sqrt(rho_node), 2 * self.T_pad - 1), dtype=float)
        self.nodes = []
        offset = 0
        for level in range(self.depth):
            width = self.T_pad >> level
            self.nodes.append(flat[offset:offset + width])
            offset += width
        self._values = None

    def node(self, a: int, b: int) -> float:
        size = b - a
        level = size.bit_length() - 1
        if size != 1 << level or a % size:
            raise ValueError(f"({a},{b}] is not a tree node")
        return float(self.nodes[level][a >> level])

    def evaluate(self, t: int) -> float:
        if not 1 <= t <= self.T_pad:
            raise ValueError(f"t must be in [1, {self.T_pad}]")
        total = 0.0
        for level in range(t.bit_length()):
            if t >> level & 1:
                total += self.nodes[level][(t >> level) - 1]
        return float(total)

    __getitem__ = evaluate

    def values(self) -> np.ndarray:
        """Z[1..T] as an array (index 0 holds Z[1])."""
        if self._values is None:
            t = np.arange(1, self.T + 1)
            z = np.zeros(self.T)
            for level in range(self.depth):
                bit = (t >> level) & 1
                idx = np.maximum((t >> level) - 1, 0)
                z += np.where(bit == 1, self.nodes[level][idx], 0.0)
            self._values = z
        return self._values

    def variance(self, t: int) -> float:
        return len(dyadic_decomposition(t)) / self.rho_node


def sample_tree_noise(T: int, rho_node: float, noise=None) -> BinaryTreeNoise:
    return BinaryTreeNoise(T, rho_node, noise)


# -- privacy budgets ------------------------------------------------------------------

@dataclass(frozen=True)
class PrivacyBudget:
    rho: float | None = None
    epsilon: float | None = None
    delta: float | None = None

    def __post_init__(self):
        zcdp = self.rho is not None
        approx = self.epsilon is not None or self.delta is not None
        if zcdp == approx:
            raise ValueError("give either rho, or epsilon and delta")
        if zcdp and not self.rho > 0:
            raise ValueError("rho must be positive")
        if approx:
            if self.epsilon is None or not self.epsilon > 0:
                raise ValueError("epsilon must be positive")
            d = 0.0 if self.delta is None else self.delta
            if not 0 <= d < 1:
                raise ValueError("delta must lie in [0, 1)")
            object.__setattr__(self, "delta", d)

    @property
    def mode(self) -> str:
        return "zCDP" if self.rho is not None else "approxDP"

    def to_dp(self, delta: float) -> "PrivacyBudget":
        eps, delta = zcdp_to_dp(self.rho, delta)
        return PrivacyBudget(epsilon=eps, delta=delta)

    def to_zcdp(self) -> "PrivacyBudget":
        return PrivacyBudget(rho=dp_to_zcdp_budget(self.epsilon, self.delta))


def calibrate_alg1_rho(rho: float, w: int, T: int) -> float:
    """Per-node parameter rho / (4 w (log2 T_pad + 1)) of the flippancy-bounded tree."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if w < 1:
        raise ValueError("flippancy bound must be >= 1")
    return rho / (4 * w * tree_levels(T))


def gaussian_sigma(rho: float, sensitivity: float = 1.0) -> float:
    """Std of the Gaussian mechanism that is rho-zCDP: Delta^2 / (2 sigma^2) = rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return sensitivity / math.sqrt(2 * rho)


def gaussian_mechanism_rho(sigma: float, sensitivity: float = 1.0) -> float:
    return sensitivity ** 2 / (2 * sigma ** 2)


def zcdp_to_dp(rho: float, delta: float) -> tuple[float, float]:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return rho + 2 * math.sqrt(rho * math.log(1 / delta)), delta


def pure_dp_to_zcdp(epsilon: float) -> float:
    return 0.5 * epsilon ** 2


def dp_to_zcdp_budget(epsilon: float, delta: float) -> float:
    """rho = eps^2 / (16 ln(1/delta)), the setting used to state (eps, delta) bounds."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1); pure-DP budgets are not handled here")
    return epsilon ** 2 / (16 * math.log(1 / delta))


def compose_zcdp(budgets: Sequence[float]) -> float:
    for b in budgets:
        if b < 0:
            raise ValueError("budgets must be nonnegative")
    return math.fsum(budgets)


def group_privacy(epsilon: float, delta: float, group_size: int) -> tuple[float, float]:
    if group_size < 1:
        raise ValueError("group size must be >= 1")
    if group_size == 1 or delta == 0:
        return group_size * epsilon, delta
    return group_size * epsilon, delta * math.expm1(group_size * epsilon) / math.expm1(epsilon)


def gaussian_tail_bound(lam: float, sigma: float, m: int = 1) -> float:
    """Union-bound tail: Pr[max_j |R_j| > lam] <= 2 m exp(-lam^2 / (2 sigma^2))."""
    return 2 * m * math.exp(-lam ** 2 / (2 * sigma ** 2))
