"""Mechanisms that do not need a flippancy bound up front.

:class:`AdaptiveMechanism` runs one bounded mechanism per power-of-two bound
and uses the sparse vector technique on the number of high-flippancy
elements to decide which one to report.  :class:`RecomputeMechanism` is a
block-recompute baseline for sensitivity-1 functions, and
:class:`HybridMechanism` switches to it once the flippancy estimate gets too
large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .base import Mechanism
from .bounded import BoundedMechanism
from .noise import as_noise_source, compose_zcdp, gaussian_sigma, padded_horizon
from .stream import ElementTable, StreamEntry
from .svt import ABOVE, SparseVector


def high_flippancy_count(table: ElementTable, threshold: int) -> int:
    """Number of elements whose running flippancy is >= threshold."""
    return sum(1 for s in table.states.values() if s.flippancy >= threshold)


class FlippancyTracker:
    """Element table plus counts of elements at or above each power-of-two flippancy."""

    def __init__(self, levels: int):
        self.table = ElementTable()
        self.at_least = [0] * (levels + 1)  # at_least[i] = |{u : flip(u) >= 2^i}|

    def update(self, entry: StreamEntry) -> None:
        st = self.table.states.get(entry.element) if entry.element is not None else None
        before = 0 if st is None else st.flippancy
        st = self.table.update(entry)
        if st is not None and st.flippancy != before:
            f = st.flippancy
            if f & (f - 1) == 0:
                i = f.bit_length() - 1
                if i < len(self.at_least):
                    self.at_least[i] += 1

    def count_at_least(self, w: int) -> int:
        """w must be a power of two."""
        return self.at_least[w.bit_length() - 1]


@dataclass
class SvtRecord:
    t: int
    w_max: int
    query: float
    answer: str


class AdaptiveMechanism(Mechanism):
    """rho-zCDP CountDistinct mechanism whose error adapts to the maximum flippancy.

    Half the budget is split evenly across the bounded instances with bounds
    1, 2, ..., T_pad; the other half goes to the sparse vector.
    """

    def __init__(self, horizon: int, rho: float, noise=None, trace: bool = False,
                 clamp: bool = False):
        self.horizon = horizon
        self.rho = rho
        self.T_pad = padded_horizon(horizon)
        self.log_T = self.T_pad.bit_length() - 1
        src = as_noise_source(noise)
        children = src.spawn(self.log_T + 2)
        self.instance_rho = rho / (2 * (self.log_T + 1))
        self.instances = [
            BoundedMechanism(horizon, self.instance_rho, 1 << i, children[i], clamp=clamp)
            for i in range(self.log_T + 1)
        ]
        self.svt_rho = rho / 2
        self.svt = SparseVector(self.svt_rho, max(self.log_T, 1), children[-1])
        self.tracker = FlippancyTracker(self.log_T)
        self.w_max = 1
        self.w_max_history: list[int] = []
        self.trace: list[SvtRecord] | None = [] if trace else None
        self.t = 0

    def budgets(self) -> list[float]:
        return [m.rho for m in self.instances] + [self.svt.rho]

    def total_rho(self) -> float:
        return compose_zcdp(self.budgets())

    def query_value(self) -> float:
        return self.tracker.count_at_least(self.w_max) - math.sqrt(self.w_max / self.rho)

    def _escalate(self) -> None:
        while self.w_max < self.T_pad:
            q = self.query_value()
            answer = self.svt.query(q)
            if self.trace is not None:
                self.trace.append(SvtRecord(self.t, self.w_max, q, answer))
            if answer != ABOVE:
                break
            self.w_max *= 2

    def step(self, entry: StreamEntry) -> float:
        self._advance()
        self.tracker.update(entry)
        estimates = [m.step(entry) for m in self.instances]
        self._escalate()
        self.w_max_history.append(self.w_max)
        return estimates[self.w_max.bit_length() - 1]


class RecomputeMechanism(Mechanism):
    """Recompute the exact count with Gaussian noise once every L steps, repeat in between.

    With L = ceil((T / rho)^(1/3)) and ceil(T / L) recomputations sharing the
    budget, the error is about L + sqrt(T / (L rho)), i.e. (T / rho)^(1/3) up
    to constants.
    """

    def __init__(self, horizon: int, rho: float, noise=None, block: int | None = None):
        self.horizon = horizon
        self.rho = rho
        self.block = block if block is not None else max(1, math.ceil((horizon / rho) ** (1 / 3)))
        self.recomputes = math.ceil(horizon / self.block)
        self.per_release_rho = rho / self.recomputes
        self.sigma = gaussian_sigma(self.per_release_rho)
        self.noise = as_noise_source(noise)
        self.table = ElementTable()
        self.last = 0.0
        self.t = 0

    def step(self, entry: StreamEntry) -> float:
        self._advance()
        self.table.update(entry)
        if (self.t - 1) % self.block == 0:
            self.last = self.table.present + float(self.noise.gaussian(self.sigma))
        return self.last


def hybrid_switch_level(horizon: int, rho: float) -> int:
    """k with 2^k the largest flippancy bracket served by a bounded instance."""
    T_pad = padded_horizon(horizon)
    target = min(rho ** (1 / 3) * horizon ** (2 / 3), horizon)
    k = math.ceil(math.log2(target)) if target > 1 else 0
    return min(k, T_pad.bit_length() - 1)


class HybridMechanism(AdaptiveMechanism):
    """Bounded instances for bounds 1..2^k plus a recompute instance for larger flippancy."""

    def __init__(self, horizon: int, rho: float, noise=None, trace: bool = False,
                 clamp: bool = False):
        self.horizon = horizon
        self.rho = rho
        self.T_pad = padded_horizon(horizon)
        self.log_T = self.T_pad.bit_length() - 1
        self.k = hybrid_switch_level(horizon, rho)
        src = as_noise_source(noise)
        children = src.spawn(self.k + 3)
        self.instance_rho = rho / (2 * (self.k + 2))
        self.instances = [
            BoundedMechanism(horizon, self.instance_rho, 1 << i, children[i], clamp=clamp)
            for i in range(self.k + 1)
        ]
        self.recompute = RecomputeMechanism(horizon, self.instance_rho, children[self.k + 1])
        self.svt_rho = rho / 2
        self.svt = SparseVector(self.svt_rho, self.k + 1, children[-1])
        self.tracker = FlippancyTracker(self.log_T)
        self.w_max = 1
        self.w_max_history = []
        self.trace = [] if trace else None
        self.t = 0

    @property
    def switched(self) -> bool:
        return self.w_max > 1 << self.k

    def budgets(self) -> list[float]:
        return [m.rho for m in self.instances] + [self.recompute.rho, self.svt.rho]

    def step(self, entry: StreamEntry) -> float:
        self._advance()
        self.tracker.update(entry)
        estimates = [m.step(entry) for m in self.instances]
        fallback = self.recompute.step(entry)
        while not self.switched:
            q = self.query_value()
            answer = self.svt.query(q)
            if self.trace is not None:
                self.trace.append(SvtRecord(self.t, self.w_max, q, answer))
            if answer != ABOVE:
                break
            self.w_max *= 2
        self.w_max_history.append(self.w_max)
        if self.switched:
            return fallback
        return estimates[self.w_max.bit_length() - 1]
