import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_adaptive_trace, oracle_count_distinct, oracle_flippancy, random_stream, streams
from turnstile_dp.adaptive import (
    AdaptiveMechanism,
    FlippancyTracker,
    HybridMechanism,
    RecomputeMechanism,
    high_flippancy_count,
    hybrid_switch_level,
)
from turnstile_dp.noise import NoiseSource, ZeroNoise
from turnstile_dp.stream import ElementTable, Stream, count_distinct_exact


def zero_adaptive(x, rho=1.0, **kw):
    m = AdaptiveMechanism(len(x), rho, ZeroNoise(), **kw)
    return m, m.run(x)


def test_small_trace():
    # t = 2: flip(a) = 1 gives query 1 - 1 = 0, which is Above, so w_max doubles
    m, out = zero_adaptive(Stream.of("+a", "+b", "-a"))
    assert m.w_max_history == [1, 2, 2]
    assert out.tolist() == [1, 2, 1]
    assert oracle_adaptive_trace(Stream.of("+a", "+b", "-a"), 1.0) == [1, 2, 2]


def test_all_noop():
    m, out = zero_adaptive(Stream.noops(16))
    assert not out.any()
    assert m.w_max_history == [1] * 16


def test_single_high_flip_element():
    # one element is never enough to clear sqrt(w_max / rho) once w_max >= 2
    x = Stream.of(*(["+a", "-a"] * 8 + ["+a"]))
    m, _ = zero_adaptive(x)
    assert m.w_max == 2
    assert oracle_adaptive_trace(x, 1.0)[-1] == 2


@settings(max_examples=150, deadline=None)
@given(streams(max_T=24, max_universe=6), st.sampled_from([0.25, 1.0, 4.0]))
def test_trace_matches_oracle(x, rho):
    m, _ = zero_adaptive(x, rho)
    assert m.w_max_history == oracle_adaptive_trace(x, rho)


@settings(max_examples=150, deadline=None)
@given(streams(max_T=24, max_universe=6))
def test_noiseless_soundness(x):
    m, out = zero_adaptive(x)
    truth = oracle_count_distinct(x)
    for t in range(1, len(x) + 1):
        w = m.w_max_history[t - 1]
        over = sum(1 for u in range(x.universe_size) if oracle_flippancy(x, u, t) > w)
        assert abs(out[t - 1] - truth[t - 1]) <= over


@settings(max_examples=100, deadline=None)
@given(streams(max_T=40), st.integers(0, 2**32 - 1))
def test_w_max_shape(x, seed):
    m = AdaptiveMechanism(len(x), 0.5, NoiseSource(seed))
    m.run(x)
    h = m.w_max_history
    assert all(a <= b for a, b in zip(h, h[1:]))
    assert all(w & (w - 1) == 0 and 1 <= w <= m.T_pad for w in h)


@pytest.mark.parametrize("T", [1, 2, 5, 256, 4096])
@pytest.mark.parametrize("rho", [0.1, 1.0])
def test_budget_ledger(T, rho):
    for cls in (AdaptiveMechanism, HybridMechanism):
        m = cls(T, rho, ZeroNoise())
        assert math.isclose(m.total_rho(), rho, rel_tol=1e-12)


def test_trace_records():
    m = AdaptiveMechanism(3, 1.0, ZeroNoise(), trace=True)
    m.run(Stream.of("+a", "+b", "-a"))
    assert [(r.t, r.w_max, r.answer) for r in m.trace] == [
        (1, 1, "Below"), (2, 1, "Above"), (2, 2, "Below"), (3, 2, "Below")]


# -- high flippancy counts --

def _table(x):
    table = ElementTable()
    for e in x:
        table.update(e)
    return table


def test_high_flippancy_count():
    assert high_flippancy_count(ElementTable(), 1) == 0
    x = Stream.of("+a", "-a", "+a", "+b")
    assert high_flippancy_count(_table(x), 2) == 1
    assert high_flippancy_count(_table(x), 0) == 2


@given(streams(max_T=40))
def test_tracker_matches_direct_count(x):
    tracker = FlippancyTracker(6)
    for e in x:
        tracker.update(e)
        for i in range(7):
            assert tracker.count_at_least(1 << i) == high_flippancy_count(tracker.table, 1 << i)


# -- recompute --

@given(streams(max_T=30))
def test_recompute_block_one_is_exact(x):
    out = RecomputeMechanism(len(x), 1.0, ZeroNoise(), block=1).run(x)
    assert out.tolist() == oracle_count_distinct(x)


def test_recompute_stale_repeat():
    out = RecomputeMechanism(2, 1.0, ZeroNoise(), block=2).run(Stream.of("+a", "+b"))
    assert out.tolist() == [1, 1]


@given(streams(max_T=40), st.integers(1, 8))
def test_recompute_staleness(x, L):
    out = RecomputeMechanism(len(x), 1.0, ZeroNoise(), block=L).run(x)
    assert np.max(np.abs(out - count_distinct_exact(x))) <= L - 1


def test_recompute_default_block():
    m = RecomputeMechanism(1000, 1.0)
    assert m.block == 10 and m.recomputes == 100
    assert m.per_release_rho == pytest.approx(0.01)


# -- hybrid --

def test_switch_level():
    assert hybrid_switch_level(4096, 1.0) == 8  # 4096^(2/3) = 256
    assert hybrid_switch_level(8, 1000.0) == 3  # capped at T
    assert hybrid_switch_level(1, 1.0) == 0


@settings(max_examples=100, deadline=None)
@given(streams(max_T=24, max_universe=6))
def test_hybrid_matches_adaptive_without_noise(x):
    # switching needs sqrt(2^k / rho) elements with flippancy >= 2^k, which a
    # stream of length T cannot supply when 2^k >= rho^(1/3) T^(2/3)
    a = AdaptiveMechanism(len(x), 1.0, ZeroNoise())
    h = HybridMechanism(len(x), 1.0, ZeroNoise())
    assert a.run(x).tolist() == h.run(x).tolist()
    assert a.w_max_history == h.w_max_history
    assert not h.switched


def test_hybrid_switches_to_recompute_under_noise():
    T = 1024
    h = HybridMechanism(T, 1.0, NoiseSource(3))
    x = Stream.noops(T)
    switched_at = None
    for t, e in enumerate(x, start=1):
        out = h.step(e)
        if h.switched:
            switched_at = switched_at or t
            assert out == h.recompute.last
        else:
            assert out == h.instances[h.w_max.bit_length() - 1]._z[t - 1]
    assert switched_at is not None
    assert h.w_max_history[-1] == 1 << (h.k + 1)


def test_hybrid_all_noop():
    assert not HybridMechanism(32, 1.0, ZeroNoise()).run(Stream.noops(32)).any()


def test_seeded_runs_reproducible(rng):
    x = random_stream(rng, 64, 6)
    a = AdaptiveMechanism(64, 1.0, NoiseSource(5)).run(x)
    b = AdaptiveMechanism(64, 1.0, NoiseSource(5)).run(x)
    assert np.array_equal(a, b)
