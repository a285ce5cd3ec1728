"""Synthetic streams, error measurement and benchmark sweeps."""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adaptive import AdaptiveMechanism, HybridMechanism, RecomputeMechanism
from .base import ExactMechanism, Mechanism
from .bounded import BoundedMechanism
from .noise import NoiseSource, ZeroNoise
from .stream import Stream, StreamBuilder, count_distinct_exact

MODELS = ("uniform-turnstile", "likes-random", "adversarial-flip", "phase-batch")
MECHANISMS = ("bounded", "adaptive", "hybrid", "recompute", "exact")


@dataclass(frozen=True)
class GeneratorSpec:
    model: str
    T: int
    universe: int = 8
    w: int | None = None
    seed: int | None = 0
    noop_rate: float = 0.2

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.universe < 1:
            raise ValueError("universe size must be >= 1")
        if self.model == "adversarial-flip":
            if self.w is None or self.w < 1:
                raise ValueError("adversarial-flip needs a target flippancy w >= 1")
            if self.w >= self.T:
                raise ValueError(f"flippancy {self.w} is unreachable in {self.T} steps")


def generate(spec: GeneratorSpec) -> Stream:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    b = StreamBuilder()
    if spec.model == "uniform-turnstile":
        for _ in range(spec.T):
            if rng.random() < spec.noop_rate:
                b.noop()
            else:
                b.append("+" if rng.random() < 0.5 else "-", f"e{rng.integers(spec.universe)}")
    elif spec.model == "likes-random":
        present = [False] * spec.universe
        for _ in range(spec.T):
            if rng.random() < spec.noop_rate:
                b.noop()
                continue
            u = int(rng.integers(spec.universe))
            b.append("-" if present[u] else "+", f"e{u}")
            present[u] = not present[u]
    elif spec.model == "adversarial-flip":
        _adversarial_flip(b, spec)
    else:
        _phase_batch(b, spec, rng)
    x = b.build()
    assert len(x) == spec.T
    return x


def _adversarial_flip(b: StreamBuilder, spec: GeneratorSpec) -> None:
    # round-robin toggles; the element toggled at t = 1 gets one extra toggle
    # because a change at the first step is not a flip
    w = spec.w
    m = max(1, min(spec.universe, (spec.T - 1) // w))
    present = [False] * m
    for r in range(w + 1):
        for u in range(m):
            if r == w and u > 0:
                break
            b.append("-" if present[u] else "+", f"e{u}")
            present[u] = not present[u]
    b.noop(spec.T - len(b.entries))


def _phase_batch(b: StreamBuilder, spec: GeneratorSpec, rng) -> None:
    while len(b.entries) < spec.T:
        batch = np.flatnonzero(rng.random(spec.universe) < 0.5)
        for op in "+-":
            for u in batch:
                if len(b.entries) < spec.T:
                    b.append(op, f"e{u}")
        if len(b.entries) < spec.T:
            b.noop()


# -- mechanisms ---------------------------------------------------------------------

def make_mechanism(name: str, horizon: int, rho: float, w: int | None = None, noise=None,
                   trace: bool = False, clamp: bool = False) -> Mechanism:
    if name == "bounded":
        if w is None:
            raise ValueError("the bounded mechanism needs a flippancy bound w")
        return BoundedMechanism(horizon, rho, w, noise, clamp=clamp)
    if name == "adaptive":
        return AdaptiveMechanism(horizon, rho, noise, trace=trace, clamp=clamp)
    if name == "hybrid":
        return HybridMechanism(horizon, rho, noise, trace=trace, clamp=clamp)
    if name == "recompute":
        return RecomputeMechanism(horizon, rho, noise)
    if name == "exact":
        return ExactMechanism(horizon)
    raise ValueError(f"unknown mechanism {name!r}; choose from {MECHANISMS}")


def runner(name: str, rho: float, w: int | None = None, noise=None):
    """A Stream -> estimates callable for plugging mechanisms into reductions."""
    def run(x: Stream) -> np.ndarray:
        return make_mechanism(name, len(x), rho, w, noise).run(x)
    return run


# -- error measurement ------------------------------------------------------------------

@dataclass
class EstimateTrace:
    true: np.ndarray
    estimate: np.ndarray

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.true - self.estimate)

    @property
    def linf(self) -> float:
        return float(self.abs_error.max()) if len(self.true) else 0.0

    def rows(self):
        for t, (c, s, e) in enumerate(zip(self.true, self.estimate, self.abs_error), start=1):
            yield t, int(c), float(s), float(e)


def measure_error(x: Stream, estimates) -> EstimateTrace:
    estimates = np.asarray(estimates, dtype=float)
    if len(estimates) != len(x):
        raise ValueError(f"{len(estimates)} estimates for a stream of length {len(x)}")
    return EstimateTrace(count_distinct_exact(x).astype(float), estimates)


# -- CSV ------------------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# -- benchmark sweep ---------------------------------------------------------------------------

BENCH_HEADER = ("w", "trials", "rho", "T", "median_linf", "p95_linf", "seed")


def trial_seeds(seed: int, trial: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """(stream seed, mechanism seed) for one trial, derived from seed + trial."""
    stream_seq, mech_seq = np.random.SeedSequence(seed + trial).spawn(2)
    return stream_seq, mech_seq


def _bench_trial(args) -> float:
    mechanism, w, rho, T, universe, seed, trial, zero_noise, bound = args
    stream_seq, mech_seq = trial_seeds(seed, trial)
    x = generate(GeneratorSpec("adversarial-flip", T, universe, w, stream_seq))
    noise = ZeroNoise() if zero_noise else NoiseSource(mech_seq)
    mech = make_mechanism(mechanism, T, rho, bound if bound is not None else w, noise)
    return measure_error(x, mech.run(x)).linf


def bench_errors(mechanism: str, w: int, trials: int, rho: float, T: int, seed: int = 0,
                 universe: int = 32, zero_noise: bool = False, bound: int | None = None,
                 jobs: int = 1) -> np.ndarray:
    """l_inf error of each trial on adversarial-flip streams with target flippancy w."""
    tasks = [(mechanism, w, rho, T, universe, seed, i, zero_noise, bound) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return np.array(list(pool.map(_bench_trial, tasks)))
    return np.array([_bench_trial(a) for a in tasks])


def bench_sweep(mechanism: str, w_grid, trials: int, rho: float, T: int, seed: int = 0,
                universe: int = 32, zero_noise: bool = False, jobs: int = 1):
    """One row per grid point: w, trials, rho, T, median and p95 l_inf error, seed."""
    if not len(w_grid):
        raise ValueError("flippancy grid is empty")
    rows = []
    for w in w_grid:
        errs = bench_errors(mechanism, w, trials, rho, T, seed, universe, zero_noise, jobs=jobs)
        rows.append((int(w), trials, float(rho), T, float(np.median(errs)),
                     float(np.percentile(errs, 95)), seed))
    return rows


def bench_csv(rows) -> str:
    return to_csv(BENCH_HEADER, rows)
