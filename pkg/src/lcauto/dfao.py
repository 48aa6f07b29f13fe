"""Deterministic finite automata with output over digit tuples.

A symbol is a digit tuple (d_0, ..., d_{k-1}), one digit per axis, and is stored
as the integer sum d_k * p**(k-1-index), so symbols sort like the tuples do.
Axis 0 is m (the x direction) and axis 1 is n (time).  Input is read least
significant digit first.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import check_prime, encode_base, pair_encode
from .errors import BudgetExceeded, DomainError, UsageError

FORMAT_HEADER = "# dfao v1"


def symbol_index(digits: Sequence[int], p: int) -> int:
    s = 0
    for d in digits:
        s = s * p + d
    return s


def symbol_digits(sym: int, p: int, arity: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(sym % p)
        sym //= p
    return tuple(reversed(out))


def _frozen(arr, dtype) -> np.ndarray:
    a = np.array(arr, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dfao:
    p: int
    bases: tuple[int, ...]
    initial: int
    outputs: np.ndarray
    trans: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        check_prime(self.p)
        if not self.bases or any(abs(b) != self.p for b in self.bases):
            raise UsageError(f"axis bases {self.bases} do not match p={self.p}")
        object.__setattr__(self, "bases", tuple(int(b) for b in self.bases))
        object.__setattr__(self, "outputs", _frozen(self.outputs, np.int64))
        object.__setattr__(self, "trans", _frozen(self.trans, np.int64))
        n = len(self.outputs)
        if n == 0:
            raise UsageError("automaton needs at least one state")
        if self.trans.shape != (n, self.p**self.arity):
            raise UsageError(f"transition table shape {self.trans.shape} != {(n, self.p ** self.arity)}")
        if not 0 <= self.initial < n:
            raise UsageError(f"initial state {self.initial} out of range")
        if self.trans.min() < 0 or self.trans.max() >= n:
            raise UsageError("transition target out of range")
        if self.outputs.min() < 0 or self.outputs.max() >= self.p:
            raise UsageError("outputs must be residues mod p")

    @property
    def arity(self) -> int:
        return len(self.bases)

    @property
    def n_states(self) -> int:
        return len(self.outputs)

    @property
    def n_symbols(self) -> int:
        return self.p**self.arity

    def __repr__(self) -> str:
        return f"Dfao(p={self.p}, bases={self.bases}, states={self.n_states}, initial={self.initial})"

    def signature(self) -> tuple:
        return (self.p, self.bases)

    def same_structure(self, other: "Dfao") -> bool:
        return (
            self.signature() == other.signature()
            and self.initial == other.initial
            and np.array_equal(self.outputs, other.outputs)
            and np.array_equal(self.trans, other.trans)
        )

    # evaluation

    def _check_point(self, point) -> tuple[int, ...]:
        pt = tuple(int(c) for c in point)
        if len(pt) != self.arity:
            raise UsageError(f"point {point} has wrong arity for {self.arity}-D automaton")
        for c, b in zip(pt, self.bases):
            if b > 0 and c < 0:
                raise DomainError(f"coordinate {c} is negative on a base-{b} axis")
        return pt

    def run(self, word: Iterable[int], state: int | None = None) -> int:
        q = self.initial if state is None else state
        for sym in word:
            q = int(self.trans[q, sym])
        return q

    def word_of(self, point) -> list[int]:
        pt = self._check_point(point)
        return [symbol_index(t, self.p) for t in pair_encode(pt, self.bases)]

    def eval_from(self, state: int, point) -> int:
        return int(self.outputs[self.run(self.word_of(point), state)])

    def eval(self, point) -> int:
        if isinstance(point, (int, np.integer)):
            point = (point,)
        return self.eval_from(self.initial, point)

    def states_many(self, points, state: int | None = None) -> np.ndarray:
        pts = np.array(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None] if self.arity == 1 else pts[None, :]
        if pts.shape[1] != self.arity:
            raise UsageError("points have the wrong arity")
        for k, b in enumerate(self.bases):
            if b > 0 and (pts[:, k] < 0).any():
                raise DomainError(f"negative coordinate on base-{b} axis {k}")
        pts = pts.copy()
        q = np.full(len(pts), self.initial if state is None else state, dtype=np.int64)
        p = self.p
        active = (pts != 0).any(axis=1)
        while active.any():
            idx = np.nonzero(active)[0]
            sub = pts[idx]
            d = sub % p
            sym = np.zeros(len(idx), dtype=np.int64)
            for k in range(self.arity):
                sym = sym * p + d[:, k]
            q[idx] = self.trans[q[idx], sym]
            pts[idx] = (sub - d) // np.array(self.bases, dtype=np.int64)
            active[idx] = (pts[idx] != 0).any(axis=1)
        return q

    def eval_many(self, points, state: int | None = None) -> np.ndarray:
        return self.outputs[self.states_many(points, state)]

    def eval_grid(self, m0: int, m1: int, n0: int = 0, n1: int = 0) -> np.ndarray:
        """Values on [m0,m1] x [n0,n1] as an array indexed [n - n0, m - m0]."""
        if self.arity == 1:
            return self.eval_many(np.arange(m0, m1 + 1)[:, None])
        ms, ns = np.meshgrid(np.arange(m0, m1 + 1), np.arange(n0, n1 + 1))
        vals = self.eval_many(np.column_stack([ms.ravel(), ns.ravel()]))
        return vals.reshape(ns.shape)

    # structural operations

    def with_initial(self, s: int) -> "Dfao":
        return Dfao(self.p, self.bases, s, self.outputs, self.trans)

    def reachable(self, start: int | None = None) -> np.ndarray:
        """States reachable from start, in canonical BFS order."""
        s0 = self.initial if start is None else start
        seen = np.full(self.n_states, -1, dtype=np.int64)
        seen[s0] = 0
        order = [s0]
        head = 0
        while head < len(order):
            q = order[head]
            head += 1
            for t in self.trans[q]:
                if seen[t] < 0:
                    seen[t] = len(order)
                    order.append(int(t))
        return np.array(order, dtype=np.int64)


def from_table(p, bases, initial, outputs, trans) -> Dfao:
    return Dfao(p, tuple(bases), initial, np.asarray(outputs), np.asarray(trans))


def constant(p: int, bases: Sequence[int], value: int = 0) -> Dfao:
    return Dfao(p, tuple(bases), 0, np.array([value % p]), np.zeros((1, p ** len(bases)), dtype=np.int64))


def prune(a: Dfao) -> Dfao:
    """Restrict to reachable states and renumber them in BFS order."""
    order = a.reachable()
    new_id = np.full(a.n_states, -1, dtype=np.int64)
    new_id[order] = np.arange(len(order))
    return Dfao(a.p, a.bases, 0, a.outputs[order], new_id[a.trans[order]])


canonical = prune


def _moore_classes(outputs: np.ndarray, trans: np.ndarray) -> np.ndarray:
    _, cls = np.unique(outputs, return_inverse=True)
    n_cls = cls.max() + 1
    while True:
        sig = np.column_stack([cls, cls[trans]])
        _, new = np.unique(sig, axis=0, return_inverse=True)
        new = new.ravel()
        n_new = new.max() + 1
        if n_new == n_cls:
            return new
        cls, n_cls = new, n_new


def minimize(a: Dfao) -> Dfao:
    """Moore partition refinement followed by canonical BFS numbering."""
    a = prune(a)
    cls = _moore_classes(a.outputs, a.trans)
    k = cls.max() + 1
    rep = np.zeros(k, dtype=np.int64)
    rep[cls[::-1]] = np.arange(a.n_states)[::-1]  # smallest member of each class
    q = Dfao(a.p, a.bases, int(cls[a.initial]), a.outputs[rep], cls[a.trans[rep]])
    return prune(q)


def reroot(a: Dfao, s: int) -> Dfao:
    if not 0 <= s < a.n_states:
        raise UsageError(f"state {s} out of range for {a.n_states}-state automaton")
    return prune(a.with_initial(s))


def _op_fn(op, p: int) -> Callable:
    if callable(op):
        return lambda x, y: np.asarray(op(x, y)) % p
    table = {
        "add": lambda x, y: (x + y) % p,
        "sub": lambda x, y: (x - y) % p,
        "mul": lambda x, y: (x * y) % p,
    }
    if op not in table:
        raise UsageError(f"unknown pointwise operation {op!r}")
    return table[op]


def product_states(a: Dfao, b: Dfao, budget: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reachable pairs of the synchronous product, BFS frontier at a time.

    Returns (pair_a, pair_b, transitions) with pairs numbered in discovery order.
    """
    if a.signature() != b.signature():
        raise UsageError(f"signature mismatch: {a.signature()} vs {b.signature()}")
    nb = b.n_states
    index = {a.initial * nb + b.initial: 0}
    pa, pb = [a.initial], [b.initial]
    rows: list[np.ndarray] = []
    head = 0
    while head < len(pa):
        qa = np.array(pa[head:], dtype=np.int64)
        qb = np.array(pb[head:], dtype=np.int64)
        head = len(pa)
        codes = a.trans[qa] * nb + b.trans[qb]
        out = np.empty_like(codes)
        for r, row in enumerate(codes):
            for c, code in enumerate(row.tolist()):
                k = index.get(code)
                if k is None:
                    k = len(pa)
                    index[code] = k
                    pa.append(code // nb)
                    pb.append(code % nb)
                out[r, c] = k
        rows.append(out)
        if budget is not None and len(pa) > budget:
            raise BudgetExceeded(f"product exceeded {budget} states")
    return np.array(pa), np.array(pb), np.vstack(rows)


def combine(a: Dfao, b: Dfao, op="add", budget: int | None = None) -> Dfao:
    """Pointwise op of two automata by the product construction (not minimized)."""
    f = _op_fn(op, a.p)
    pa, pb, trans = product_states(a, b, budget)
    outs = f(a.outputs[pa], b.outputs[pb])
    return Dfao(a.p, a.bases, 0, outs, trans)


@dataclass(frozen=True)
class DfaoIsoReport:
    isomorphic: bool
    mapping: tuple[int, ...] | None = None
    witness: tuple[tuple[int, ...], ...] | None = None
    values: tuple[int, int] | None = None
    point: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.isomorphic


def shortest_difference(a: Dfao, b: Dfao) -> list[int] | None:
    """Shortest symbol word on which a and b output different values."""
    if a.signature() != b.signature():
        raise UsageError("signature mismatch")
    nb = b.n_states
    start = a.initial * nb + b.initial
    parent = {start: None}
    queue = deque([start])
    while queue:
        code = queue.popleft()
        qa, qb = divmod(code, nb)
        if a.outputs[qa] != b.outputs[qb]:
            word = []
            while parent[code] is not None:
                code, sym = parent[code]
                word.append(sym)
            return word[::-1]
        for sym in range(a.n_symbols):
            nxt = int(a.trans[qa, sym]) * nb + int(b.trans[qb, sym])
            if nxt not in parent:
                parent[nxt] = (code, sym)
                queue.append(nxt)
    return None


def decode_word(word: Sequence[int], p: int, bases: Sequence[int]) -> tuple[int, ...]:
    coords = [0] * len(bases)
    for pos, sym in enumerate(word):
        for k, d in enumerate(symbol_digits(sym, p, len(bases))):
            coords[k] += d * bases[k] ** pos
    return tuple(coords)


def iso_check(a: Dfao, b: Dfao) -> DfaoIsoReport:
    """Compare the functions computed by a and b via their minimal forms."""
    if a.signature() != b.signature():
        raise UsageError("signature mismatch")
    ma, mb = minimize(a), minimize(b)
    if ma.same_structure(mb):
        return DfaoIsoReport(True, mapping=tuple(range(ma.n_states)))
    word = shortest_difference(ma, mb)
    if word is None:  # cannot happen for distinct minimal machines
        raise AssertionError("distinct minimal automata with equal behaviour")
    qa, qb = ma.run(word), mb.run(word)
    digits = tuple(symbol_digits(s, a.p, a.arity) for s in word)
    return DfaoIsoReport(
        False,
        witness=digits,
        values=(int(ma.outputs[qa]), int(mb.outputs[qb])),
        point=decode_word(word, a.p, a.bases),
    )


def all_words(n_symbols: int, max_len: int):
    for length in range(max_len + 1):
        yield from itertools.product(range(n_symbols), repeat=length)


# affine reindexing by a carry transducer


def compose_affine(
    a: Dfao,
    axis: int,
    coeffs: Sequence[int],
    const: int = 0,
    in_bases: Sequence[int] | None = None,
    outside: int = 0,
    budget: int = 2_000_000,
) -> Dfao:
    """Automaton reading x' in in_bases and returning a evaluated at x.

    x agrees with x' except x[axis] = sum(coeffs[k] * x'[k]) + const.  When the
    target axis uses base p and that sum is negative, the result is `outside`.
    """
    p, k = a.p, a.arity
    in_bases = tuple(a.bases if in_bases is None else in_bases)
    coeffs = tuple(int(c) for c in coeffs)
    if len(in_bases) != k or len(coeffs) != k:
        raise UsageError("coefficient and base lists must match the arity")
    if any(abs(b) != p for b in in_bases):
        raise UsageError("input bases must be +-p")
    for j in range(k):
        if j != axis and in_bases[j] != a.bases[j]:
            raise UsageError(f"axis {j} base must be unchanged")
    bt = a.bases[axis]
    flips = [in_bases[j] != bt for j in range(k)]
    track_parity = any(c and f for c, f in zip(coeffs, flips))

    syms = [symbol_digits(s, p, k) for s in range(p**k)]

    def flush_state(q: int, carry: int) -> int | None:
        if bt > 0 and carry < 0:
            return None
        for d in encode_base(carry, bt).digits:
            tup = [0] * k
            tup[axis] = d
            q = int(a.trans[q, symbol_index(tup, p)])
        return q

    start = (a.initial, const, 0)
    index = {start: 0}
    states = [start]
    rows = []
    head = 0
    while head < len(states):
        q, carry, par = states[head]
        head += 1
        row = []
        for digs in syms:
            t = carry
            for j, c in enumerate(coeffs):
                if c:
                    sgn = -1 if (flips[j] and par) else 1
                    t += c * sgn * digs[j]
            out = t % p
            nc = (t - out) // bt
            tup = list(digs)
            tup[axis] = out
            nq = int(a.trans[q, symbol_index(tup, p)])
            key = (nq, nc, (par ^ 1) if track_parity else 0)
            idx = index.get(key)
            if idx is None:
                idx = len(states)
                index[key] = idx
                states.append(key)
                if len(states) > budget:
                    raise BudgetExceeded(f"carry transducer exceeded {budget} states")
            row.append(idx)
        rows.append(row)
    outs = []
    for q, carry, _ in states:
        f = flush_state(q, carry)
        outs.append(outside % p if f is None else int(a.outputs[f]))
    return Dfao(p, in_bases, 0, np.array(outs), np.array(rows))


# text format


def dumps(a: Dfao) -> str:
    lines = [
        FORMAT_HEADER,
        f"p {a.p}",
        f"arity {a.arity}",
        "axis_bases " + " ".join(str(b) for b in a.bases),
        f"states {a.n_states}",
        f"initial {a.initial}",
        "outputs " + " ".join(str(int(v)) for v in a.outputs),
        "transitions",
    ]
    lines += [" ".join(str(int(t)) for t in row) for row in a.trans]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Dfao:
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise UsageError("missing '# dfao v1' header")
    fields: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i] != "transitions":
        if lines[i] and not lines[i].startswith("#"):
            key, _, rest = lines[i].partition(" ")
            fields[key] = rest
        i += 1
    try:
        p = int(fields["p"])
        arity = int(fields["arity"])
        bases = tuple(int(b) for b in fields["axis_bases"].split())
        n = int(fields["states"])
        initial = int(fields["initial"])
        outputs = [int(v) for v in fields["outputs"].split()]
        rows = [[int(t) for t in ln.split()] for ln in lines[i + 1 :] if ln]
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed dfao file: {exc}") from exc
    if len(bases) != arity or len(outputs) != n or len(rows) != n:
        raise UsageError("dfao file sizes are inconsistent")
    return Dfao(p, bases, initial, np.array(outputs), np.array(rows).reshape(n, p**arity))


def save(a: Dfao, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(a))


def load(path) -> Dfao:
    with open(path) as fh:
        return loads(fh.read())
