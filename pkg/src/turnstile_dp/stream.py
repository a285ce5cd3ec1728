"""Turnstile streams: representation, text format, exact oracles, neighbors.

A stream is a length-T sequence over {+u, -u, _}.  Element tokens are interned
to dense integer ids on first sight; the id -> token table travels with the
stream so serialization round-trips.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Op(enum.IntEnum):
    DELETE = -1
    NOOP = 0
    INSERT = 1


class StreamEntry(NamedTuple):
    op: Op
    element: int | None = None

    @property
    def is_noop(self) -> bool:
        return self.op == Op.NOOP


NOOP = StreamEntry(Op.NOOP, None)


class StreamParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, token: str | None = None):
        self.line = line
        self.token = token
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class EmptyStreamError(StreamParseError):
    def __init__(self):
        super().__init__("stream is empty")


@dataclass(frozen=True)
class Stream:
    entries: tuple[StreamEntry, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        for e in self.entries:
            if e.op == Op.NOOP:
                if e.element is not None:
                    raise ValueError("no-op entries carry no element")
            elif e.element is None or not 0 <= e.element < len(self.labels):
                raise ValueError(f"entry {e} references an unknown element id")

    @property
    def horizon(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def universe_size(self) -> int:
        return len(self.labels)

    def label(self, element: int) -> str:
        return self.labels[element]

    def element_id(self, token: str) -> int:
        return self.labels.index(token)

    def prefix(self, t: int) -> "Stream":
        """x[1:t] with the same label table."""
        return Stream(self.entries[:t], self.labels)

    def with_entries(self, entries: Sequence[StreamEntry]) -> "Stream":
        return Stream(tuple(entries), self.labels)

    def elements(self) -> list[int]:
        """Ids that appear at least once, in order of first appearance."""
        seen: dict[int, None] = {}
        for e in self.entries:
            if e.element is not None:
                seen.setdefault(e.element, None)
        return list(seen)

    @classmethod
    def of(cls, *tokens: str) -> "Stream":
        """Shorthand constructor: ``Stream.of("+a", "-a", "_")``."""
        builder = StreamBuilder()
        for tok in tokens:
            if tok in ("_", "⊥"):
                builder.noop()
            elif tok[:1] in "+-" and len(tok) > 1:
                builder.append(tok[0], tok[1:])
            else:
                raise ValueError(f"bad token {tok!r}")
        return builder.build()

    @classmethod
    def noops(cls, T: int) -> "Stream":
        return cls((NOOP,) * T, ())


@dataclass
class StreamBuilder:
    """Accumulates entries while interning element tokens."""

    entries: list[StreamEntry] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    _ids: dict[str, int] = field(default_factory=dict)

    def intern(self, token: str) -> int:
        token = str(token)
        if not token or any(c.isspace() for c in token):
            raise ValueError(f"element token must be non-empty without whitespace: {token!r}")
        i = self._ids.get(token)
        if i is None:
            i = self._ids[token] = len(self.labels)
            self.labels.append(token)
        return i

    def append(self, sign: str, token) -> "StreamBuilder":
        op = Op.INSERT if sign == "+" else Op.DELETE
        self.entries.append(StreamEntry(op, self.intern(token)))
        return self

    def insert(self, token) -> "StreamBuilder":
        return self.append("+", token)

    def delete(self, token) -> "StreamBuilder":
        return self.append("-", token)

    def noop(self, count: int = 1) -> "StreamBuilder":
        self.entries.extend([NOOP] * count)
        return self

    def build(self) -> Stream:
        return Stream(tuple(self.entries), tuple(self.labels))


# -- text format ------------------------------------------------------------

def parse_stream(text: bytes | str) -> Stream:
    """Parse the line format: ``+ id``, ``- id``, ``_``, ``#`` comments."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    builder = StreamBuilder()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if line == "" or line.startswith("#"):
            continue
        if line == "_":
            builder.noop()
            continue
        sign, sep, token = line[:1], line[1:2], line[2:]
        if sign not in ("+", "-"):
            raise StreamParseError("expected '+', '-' or '_'", lineno, line)
        if sep != " ":
            raise StreamParseError("expected a single space after the sign", lineno, line)
        if not token or any(c.isspace() for c in token):
            raise StreamParseError("bad element token", lineno, token)
        builder.append(sign, token)
    if not builder.entries:
        raise EmptyStreamError()
    return builder.build()


def serialize_stream(x: Stream) -> str:
    lines = []
    for e in x.entries:
        if e.op == Op.NOOP:
            lines.append("_")
        else:
            lines.append(("+ " if e.op == Op.INSERT else "- ") + x.labels[e.element])
    return "".join(line + "\n" for line in lines)


def read_stream(path) -> Stream:
    with open(path, "rb") as fh:
        return parse_stream(fh.read())


def write_stream(x: Stream, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(serialize_stream(x))


# -- incremental element state -----------------------------------------------

class ElementState:
    __slots__ = ("count", "exists", "flippancy")

    def __init__(self):
        self.count = 0
        self.exists = False
        self.flippancy = 0

    def __repr__(self):
        return f"ElementState(count={self.count}, exists={self.exists}, flippancy={self.flippancy})"


class ElementTable:
    """Running count, existence bit and flippancy for every element seen.

    The existence vector of every element is 0 "before" the stream, but a
    change at t = 1 is not a flip: flippancy counts adjacent pairs inside
    x[1:t] only.
    """

    def __init__(self):
        self.states: dict[int, ElementState] = {}
        self.t = 0
        self.present = 0

    def update(self, entry: StreamEntry) -> ElementState | None:
        """Apply the entry at time t+1; returns the touched state, if any."""
        self.t += 1
        if entry.op == Op.NOOP:
            return None
        st = self.states.get(entry.element)
        if st is None:
            st = self.states[entry.element] = ElementState()
        st.count += entry.op
        exists = st.count > 0
        if exists != st.exists:
            st.exists = exists
            self.present += 1 if exists else -1
            if self.t > 1:
                st.flippancy += 1
        return st

    def flippancy(self, element: int) -> int:
        st = self.states.get(element)
        return 0 if st is None else st.flippancy

    def max_flippancy(self) -> int:
        return max((s.flippancy for s in self.states.values()), default=0)


# -- exact oracles -------------------------------------------------------------

def existence_vector(x: Stream, u: int) -> np.ndarray:
    """f_u(x): bit t is 1 iff u has strictly more insertions than deletions in x[1:t]."""
    out = np.zeros(len(x), dtype=np.int8)
    count = 0
    for t, e in enumerate(x.entries):
        if e.element == u:
            count += e.op
        out[t] = count > 0
    return out


def count_distinct_exact(x: Stream) -> np.ndarray:
    table = ElementTable()
    out = np.empty(len(x), dtype=np.int64)
    for t, e in enumerate(x.entries):
        table.update(e)
        out[t] = table.present
    return out


def flippancy(x: Stream, u: int) -> int:
    f = existence_vector(x, u)
    return int(np.count_nonzero(f[1:] != f[:-1]))


def max_flippancy(x: Stream) -> int:
    return max((flippancy(x, u) for u in x.elements()), default=0)


def flippancies(x: Stream) -> dict[int, int]:
    table = ElementTable()
    for e in x.entries:
        table.update(e)
    return {u: s.flippancy for u, s in table.states.items()}


def stream_indicator(x: Stream) -> frozenset[int]:
    """Ids with positive count at the end of the stream (the support of h_x)."""
    counts: dict[int, int] = {}
    for e in x.entries:
        if e.element is not None:
            counts[e.element] = counts.get(e.element, 0) + e.op
    return frozenset(u for u, c in counts.items() if c > 0)


# -- model validation -----------------------------------------------------------

@dataclass(frozen=True)
class ModelViolation:
    t: int
    element: str
    rule: str

    def __str__(self):
        return f"t={self.t} element={self.element}: {self.rule}"


def validate_model(x: Stream, model: str = "general") -> ModelViolation | None:
    """Returns None when x is valid in the model, else the first violation.

    ``strict``: counts never go below zero.  ``likes``: insert only when absent,
    delete only when present.
    """
    if model not in ("general", "strict", "likes"):
        raise ValueError(f"unknown model {model!r}")
    if model == "general":
        return None
    counts: dict[int, int] = {}
    for t, e in enumerate(x.entries, start=1):
        if e.op == Op.NOOP:
            continue
        c = counts.get(e.element, 0)
        if model == "likes":
            if e.op == Op.INSERT and c > 0:
                return ModelViolation(t, x.labels[e.element], "insertion of a present element")
            if e.op == Op.DELETE and c <= 0:
                return ModelViolation(t, x.labels[e.element], "deletion of an absent element")
        c += e.op
        if model == "strict" and c < 0:
            return ModelViolation(t, x.labels[e.element], "count below zero")
        counts[e.element] = c
    return None


# -- neighbors --------------------------------------------------------------------

def _fresh_label(x: Stream) -> str:
    taken = set(x.labels)
    i = len(x.labels)
    while f"n{i}" in taken:
        i += 1
    return f"n{i}"


def make_neighbors(x: Stream, level: str, seed=None, *, element: int | None = None,
                   positions: Iterable[int] | None = None) -> Stream:
    """A random event- or item-neighbor of x with the same length.

    ``element`` and ``positions`` (0-based) pin the otherwise random choice
    for item-level neighbors that remove entries; for event level,
    ``positions`` pins the single replaced index.
    """
    if len(x) == 0:
        raise ValueError("stream must be nonempty")
    rng = np.random.default_rng(seed)
    entries = list(x.entries)
    labels = list(x.labels)

    if level == "event":
        if positions is not None:
            (pos,) = tuple(positions)
        else:
            pos = int(rng.integers(len(x)))
        if entries[pos].op != Op.NOOP:
            entries[pos] = NOOP
        else:
            if labels and rng.random() < 0.75:
                u = int(rng.integers(len(labels)))
            else:
                u = len(labels)
                labels.append(_fresh_label(x))
            op = Op.INSERT if rng.random() < 0.5 else Op.DELETE
            entries[pos] = StreamEntry(op, u)
        return Stream(tuple(entries), tuple(labels))

    if level != "item":
        raise ValueError(f"level must be 'event' or 'item', got {level!r}")

    present = x.elements()
    noop_pos = [i for i, e in enumerate(entries) if e.op == Op.NOOP]
    remove = element is not None or positions is not None or not noop_pos or \
        (present and rng.random() < 0.5)
    if remove and present:
        u = present[int(rng.integers(len(present)))] if element is None else element
        own = [i for i, e in enumerate(entries) if e.element == u]
        if positions is None:
            mask = rng.random(len(own)) < 0.5
            if not mask.any():
                mask[int(rng.integers(len(own)))] = True
            chosen = [i for i, m in zip(own, mask) if m]
        else:
            chosen = list(positions)
            if any(entries[i].element != u for i in chosen):
                raise ValueError("positions must reference the chosen element")
        for i in chosen:
            entries[i] = NOOP
        return Stream(tuple(entries), tuple(labels))

    # the reverse direction: write one element into a subset of the no-op slots
    if present and rng.random() < 0.5:
        u = present[int(rng.integers(len(present)))]
    else:
        u = len(labels)
        labels.append(_fresh_label(x))
    mask = rng.random(len(noop_pos)) < 0.5
    if not mask.any():
        mask[int(rng.integers(len(noop_pos)))] = True
    for i, m in zip(noop_pos, mask):
        if m:
            entries[i] = StreamEntry(Op.INSERT if rng.random() < 0.5 else Op.DELETE, u)
    return Stream(tuple(entries), tuple(labels))


def _aligned(x: Stream, y: Stream):
    """Entries of x and y as (op, token) pairs so differing label tables compare."""
    def key(s, e):
        return (e.op, None if e.element is None else s.labels[e.element])
    return [key(x, a) for a in x.entries], [key(y, b) for b in y.entries]


def differing_positions(x: Stream, y: Stream) -> list[int]:
    if len(x) != len(y):
        raise ValueError("streams have different lengths")
    a, b = _aligned(x, y)
    return [i for i, (p, q) in enumerate(zip(a, b)) if p != q]


def is_event_neighbor(x: Stream, y: Stream) -> bool:
    a, b = _aligned(x, y)
    diff = differing_positions(x, y)
    return len(diff) == 1 and (a[diff[0]][0] == Op.NOOP) != (b[diff[0]][0] == Op.NOOP)


def is_item_neighbor(x: Stream, y: Stream) -> bool:
    """True iff one stream is the other with a subset of one element's entries blanked."""
    a, b = _aligned(x, y)
    diff = differing_positions(x, y)
    if not diff:
        return True
    for src, dst in ((a, b), (b, a)):
        tokens = {src[i][1] for i in diff}
        if len(tokens) == 1 and None not in tokens and all(dst[i][0] == Op.NOOP for i in diff):
            return True
    return False
