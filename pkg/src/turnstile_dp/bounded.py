"""Binary-tree mechanism with a given flippancy bound w.

Each element contributes to the count only while its flippancy is at most w;
once it flips more often it is ignored for the rest of the stream.  This keeps
the mechanism private on every stream, and exact-up-to-tree-noise on streams
whose maximum flippancy is at most w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Mechanism
from .noise import calibrate_alg1_rho, padded_horizon, sample_tree_noise, tree_levels
from .stream import ElementTable, Stream, StreamEntry, is_item_neighbor


class BoundedMechanism(Mechanism):
    """Flippancy-bounded binary-tree mechanism (rho-zCDP at item level).

    ``clamp=True`` post-processes each estimate into [0, |elements seen|].
    """

    def __init__(self, horizon: int, rho: float, w: int, noise=None, clamp: bool = False):
        self.horizon = horizon
        self.rho = rho
        self.w = w
        self.rho_node = calibrate_alg1_rho(rho, w, horizon)
        self.tree = sample_tree_noise(horizon, self.rho_node, noise)
        self._z = self.tree.values().tolist()
        self.table = ElementTable()
        self.truncated_count = 0  # F[t] = sum_u f~_u[t]
        self.clamp = clamp
        self.t = 0

    def step(self, entry: StreamEntry) -> float:
        self._advance()
        if entry.element is not None:
            st = self.table.states.get(entry.element)
            before = st is not None and st.exists and st.flippancy <= self.w
            st = self.table.update(entry)
            after = st.exists and st.flippancy <= self.w
            self.truncated_count += after - before
        else:
            self.table.update(entry)
        s = self.truncated_count + self._z[self.t - 1]
        if self.clamp:
            s = min(max(s, 0.0), float(len(self.table.states)))
        return s


def truncated_counts(x: Stream, w: int) -> np.ndarray:
    """F[1..T]: number of elements with positive count and flippancy <= w."""
    table = ElementTable()
    F = np.zeros(len(x), dtype=np.int64)
    included = 0
    for t, e in enumerate(x.entries):
        if e.element is None:
            table.update(e)
        else:
            st = table.states.get(e.element)
            before = st is not None and st.exists and st.flippancy <= w
            st = table.update(e)
            included += (st.exists and st.flippancy <= w) - before
        F[t] = included
    return F


@dataclass
class LevelSums:
    """G_l[i] = F[i 2^l] - F[(i-1) 2^l] for every tree level l."""

    levels: list[np.ndarray]
    T_pad: int

    def flat(self) -> np.ndarray:
        return np.concatenate(self.levels)


def level_sums(x: Stream, w: int) -> LevelSums:
    T_pad = padded_horizon(len(x))
    F = np.zeros(T_pad + 1, dtype=np.int64)
    F[1:len(x) + 1] = truncated_counts(x, w)
    F[len(x) + 1:] = F[len(x)]  # padded steps are no-ops
    levels = []
    for level in range(tree_levels(len(x))):
        step = 1 << level
        ends = F[step::step]
        starts = F[0:T_pad - step + 1:step]
        levels.append(ends - starts)
    return LevelSums(levels, T_pad)


def sensitivity_bound(w: int, T: int) -> int:
    """8 w (log2 T_pad + 1): the squared l2 bound on G - G' for item neighbors."""
    return 8 * w * tree_levels(T)


def check_sensitivity(x: Stream, x_prime: Stream, w: int) -> tuple[int, int, bool]:
    """(||G - G'||_2^2, bound, within bound) for an item-neighbor pair."""
    if len(x) != len(x_prime):
        raise ValueError("streams have different lengths")
    if not is_item_neighbor(x, x_prime):
        raise ValueError("streams are not item-neighbors")
    G = level_sums(x, w).flat()
    Gp = level_sums(x_prime, w).flat()
    dist = int(np.sum((G - Gp) ** 2))
    bound = sensitivity_bound(w, len(x))
    return dist, bound, dist <= bound

