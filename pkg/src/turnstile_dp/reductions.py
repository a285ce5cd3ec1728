"""Batch problems embedded into CountDistinct streams.

Inner products and 1-way marginals on a binary dataset are answered by
running a CountDistinct mechanism on a purpose-built stream.  With the exact
(noiseless) mechanism the answers are exact, which makes these reductions
good end-to-end oracles; with a private mechanism they turn into
reconstruction-style attacks whose error is tied to the mechanism's error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .base import ExactMechanism
from .stream import NOOP, Op, Stream, StreamEntry, count_distinct_exact, stream_indicator

Runner = Callable[[Stream], np.ndarray]


def exact_runner(x: Stream) -> np.ndarray:
    return ExactMechanism(len(x)).run(x)


def _binary(a, ndim, name):
    a = np.asarray(a)
    if a.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must be binary")
    return a.astype(np.int8)


def _universe(n: int) -> tuple[str, ...]:
    # element id i-1 carries the token "i" so labels match 1-based record indices
    return tuple(str(i) for i in range(1, n + 1))


@dataclass
class ReductionResult:
    estimates: np.ndarray
    truth: np.ndarray
    answers: np.ndarray
    stream: Stream

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.estimates - self.truth)

    @property
    def trace_error(self) -> float:
        exact = count_distinct_exact(self.stream)
        return float(np.max(np.abs(self.answers - exact))) if len(exact) else 0.0


# -- inner products ---------------------------------------------------------------

def build_inner_product_stream(y, queries) -> Stream:
    """z0 inserts the 1-records of y; each query block inserts then deletes its support."""
    y = _binary(y, 1, "y")
    n = len(y)
    queries = np.asarray(queries)
    if queries.size == 0:
        queries = queries.reshape(0, n)
    queries = _binary(queries, 2, "queries")
    if n < 1:
        raise ValueError("n must be >= 1")
    if queries.shape[1] != n:
        raise ValueError(f"queries have length {queries.shape[1]}, dataset has {n}")
    entries = [StreamEntry(Op.INSERT, i) if y[i] else NOOP for i in range(n)]
    for q in queries:
        block = [NOOP] * (2 * n)
        for i in np.flatnonzero(q):
            block[i] = StreamEntry(Op.INSERT, int(i))
            block[n + i] = StreamEntry(Op.DELETE, int(i))
        entries.extend(block)
    return Stream(tuple(entries), _universe(n))


def inner_products_via_mechanism(y, queries, run: Runner = exact_runner) -> ReductionResult:
    """b[j] = |q_j|_0 + r[n] - r[2jn] (1-based stream time)."""
    y = _binary(y, 1, "y")
    queries = _binary(np.asarray(queries).reshape(-1, len(y)), 2, "queries")
    n = len(y)
    x = build_inner_product_stream(y, queries)
    r = np.asarray(run(x), dtype=float)
    if len(r) != len(x):
        raise ValueError("mechanism returned the wrong number of answers")
    k = len(queries)
    b = np.array([queries[j].sum() + r[n - 1] - r[2 * (j + 1) * n - 1] for j in range(k)])
    truth = queries.astype(np.int64) @ y.astype(np.int64)
    return ReductionResult(b, truth.astype(float), r, x)


def indicator_identity_check(x1: Stream, x2: Stream) -> tuple[int, int, bool]:
    """<h1, h2> vs |h1|_0 + |h2|_0 - |h_{x1 x2}|_0 for insertion-only streams.

    Streams are matched by element token.
    """
    for x in (x1, x2):
        if any(e.op == Op.DELETE for e in x.entries):
            raise ValueError("streams must be insertion-only")
    h1 = {x1.labels[u] for u in stream_indicator(x1)}
    h2 = {x2.labels[u] for u in stream_indicator(x2)}
    joined = concatenate(x1, x2)
    h12 = stream_indicator(joined)
    lhs = len(h1 & h2)
    rhs = len(h1) + len(h2) - len(h12)
    return lhs, rhs, lhs == rhs


def concatenate(x1: Stream, x2: Stream) -> Stream:
    """x1 followed by x2, merging the two label tables by token."""
    labels = list(x1.labels)
    index = {tok: i for i, tok in enumerate(labels)}
    remap = []
    for tok in x2.labels:
        if tok not in index:
            index[tok] = len(labels)
            labels.append(tok)
        remap.append(index[tok])
    tail = [e if e.element is None else StreamEntry(e.op, remap[e.element]) for e in x2.entries]
    return Stream(x1.entries + tuple(tail), tuple(labels))


# -- marginals -----------------------------------------------------------------------

def build_marginals_stream(y) -> Stream:
    """Per attribute: insert the records holding a 1, then delete them."""
    y = _binary(y, 2, "y")
    n, d = y.shape
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    entries = []
    for j in range(d):
        block = [NOOP] * (2 * n)
        for i in np.flatnonzero(y[:, j]):
            block[i] = StreamEntry(Op.INSERT, int(i))
            block[n + i] = StreamEntry(Op.DELETE, int(i))
        entries.extend(block)
    return Stream(tuple(entries), _universe(n))


def marginals_via_mechanism(y, run: Runner = exact_runner) -> ReductionResult:
    """b[j] = r[(2j - 1) n] / n."""
    y = _binary(y, 2, "y")
    n, d = y.shape
    x = build_marginals_stream(y)
    r = np.asarray(run(x), dtype=float)
    if len(r) != len(x):
        raise ValueError("mechanism returned the wrong number of answers")
    b = np.array([r[(2 * (j + 1) - 1) * n - 1] / n for j in range(d)])
    return ReductionResult(b, y.mean(axis=0), r, x)


# -- epsilon scaling -------------------------------------------------------------------

def copies_for_epsilon(eps: float) -> int:
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    # 1/eps can land a hair under an integer (e.g. 1/(1/3)); snap before flooring
    inv = 1 / eps
    ell = int(np.floor(inv + 1e-9))
    return max(ell, 1)


def scale_stream(x: Stream, ell: int) -> Stream:
    """Each entry +-u becomes +-(u,1), ..., +-(u,ell); each no-op becomes ell no-ops."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    labels = tuple(f"{tok}:{c}" for tok in x.labels for c in range(1, ell + 1))
    entries = []
    for e in x.entries:
        if e.element is None:
            entries.extend([NOOP] * ell)
        else:
            base = e.element * ell
            entries.extend(StreamEntry(e.op, base + c) for c in range(ell))
    return Stream(tuple(entries), labels)


def scale_stream_for_epsilon(x: Stream, eps: float) -> Stream:
    return scale_stream(x, copies_for_epsilon(eps))


def copy_origin(token: str) -> str:
    """Original token of a scaled-stream label ``tok:c``."""
    return token.rsplit(":", 1)[0]
