import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from turnstile_dp.noise import NoiseSource, ZeroNoise
from turnstile_dp.svt import ABOVE, BELOW, SparseVector, gamma_violations, svt_gamma


def test_zero_noise_first_above_at_threshold():
    svt = SparseVector(0.5, 2, ZeroNoise())
    assert svt.answer_all([-5, -1, 3]) == [BELOW, BELOW, ABOVE]


def test_zero_noise_cutoff_forces_below():
    svt = SparseVector(0.5, 2, ZeroNoise())
    assert svt.answer_all([1, 1, 1]) == [ABOVE, ABOVE, BELOW]
    assert svt.exhausted and svt.queries == 3


def test_zero_is_above():
    assert SparseVector(1.0, 1, ZeroNoise()).query(0) == ABOVE


def test_noise_scales():
    svt = SparseVector(2.0, 5, ZeroNoise())
    assert svt.epsilon == pytest.approx(2.0)
    assert svt.query_scale == pytest.approx(10.0)


@pytest.mark.parametrize("rho, cutoff", [(0, 1), (-1, 1), (1, 0)])
def test_rejects_bad_parameters(rho, cutoff):
    with pytest.raises(ValueError):
        SparseVector(rho, cutoff)


def test_gamma_value():
    assert svt_gamma(1, math.e, 2 / math.e, 0.5) == pytest.approx(16)


@pytest.mark.parametrize("beta", [0, 1, -0.1, 1.5])
def test_gamma_rejects_beta(beta):
    with pytest.raises(ValueError):
        svt_gamma(1, 10, beta, 1)


def test_gamma_monotone():
    base = svt_gamma(4, 100, 0.05, 1)
    assert svt_gamma(8, 100, 0.05, 1) > base
    assert svt_gamma(4, 1000, 0.05, 1) > base
    assert svt_gamma(4, 100, 0.01, 1) > base
    assert svt_gamma(4, 100, 0.05, 2) < base


def test_gamma_violations_counting():
    values = [5, -5, 5, -20, 20]
    answers = [BELOW, ABOVE, ABOVE, ABOVE, BELOW]
    # cutoff 2: only the first three answers are checked
    assert gamma_violations(values, answers, 1.0, 2) == 2
    assert gamma_violations(values, answers, 10.0, 3) == 1


@given(st.lists(st.floats(-50, 50), max_size=60), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_never_more_than_cutoff_aboves(values, cutoff, seed):
    svt = SparseVector(0.3, cutoff, NoiseSource(seed))
    answers = svt.answer_all(values)
    assert answers.count(ABOVE) <= cutoff
    assert svt.above_count == answers.count(ABOVE)


def test_large_margin_answers_are_correct():
    # with rho large the noise is tiny compared with the margins
    svt = SparseVector(1e6, 3, NoiseSource(8))
    values = [-10, -10, 10, -10, 10, 10, 10]
    assert svt.answer_all(values) == [BELOW, BELOW, ABOVE, BELOW, ABOVE, ABOVE, BELOW]


def test_threshold_noise_drawn_once():
    svt = SparseVector(0.5, 3, NoiseSource(1))
    z = svt.threshold_noise
    svt.answer_all(np.zeros(20))
    assert svt.threshold_noise == z
