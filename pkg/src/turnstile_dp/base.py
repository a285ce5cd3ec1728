"""Uniform step interface shared by every continual-release mechanism."""

from __future__ import annotations

import numpy as np

from .stream import ElementTable, Stream, StreamEntry


class HorizonExceeded(RuntimeError):
    pass


class Mechanism:
    """Consumes one entry per call to :meth:`step` and returns one estimate."""

    horizon: int
    t: int = 0

    def step(self, entry: StreamEntry) -> float:
        raise NotImplementedError

    def _advance(self):
        if self.t >= self.horizon:
            raise HorizonExceeded(f"mechanism already consumed {self.horizon} entries")
        self.t += 1

    def run(self, x: Stream) -> np.ndarray:
        return np.array([self.step(e) for e in x.entries], dtype=float)


class ExactMechanism(Mechanism):
    """Noiseless oracle: the true distinct count at every step."""

    def __init__(self, horizon: int):
        self.horizon = horizon
        self.t = 0
        self.table = ElementTable()

    def step(self, entry):
        self._advance()
        self.table.update(entry)
        return float(self.table.present)
