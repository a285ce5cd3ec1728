"""Differentially private continual release of distinct counts in turnstile streams."""

from .adaptive import AdaptiveMechanism, HybridMechanism, RecomputeMechanism, high_flippancy_count
from .base import ExactMechanism, HorizonExceeded, Mechanism
from .bounded import BoundedMechanism, check_sensitivity, level_sums
from .noise import (
    BinaryTreeNoise,
    NoiseSource,
    PrivacyBudget,
    ZeroNoise,
    calibrate_alg1_rho,
    compose_zcdp,
    dp_to_zcdp_budget,
    dyadic_decomposition,
    group_privacy,
    sample_tree_noise,
    zcdp_to_dp,
)
from .stream import (
    Op,
    Stream,
    StreamEntry,
    count_distinct_exact,
    flippancy,
    make_neighbors,
    max_flippancy,
    parse_stream,
    serialize_stream,
    validate_model,
)
from .svt import SparseVector, svt_gamma

__version__ = "0.1.0"
