"""Exact automata for spacetime diagrams by closing Cartier operators on series.

The diagram U generated from u by phi has generating function f/(1 - phi y),
f = sum u_m x^m.  Every element of its [p,p]-kernel has the form
g/(1 - phi y) and Lambda_{i,j} acts on the numerator as

    g  ->  Lambda_i(phi^j g),

because Lambda_i(h q(x^p)) = Lambda_i(h) q(x).  Only g is stored.  It is a
finite F_p-combination of

* right atoms  x^a K     with K = sum_{m>=0} K_m x^m,
* left atoms   x^a R(K)  with R(K) = sum_{m>=0} K_m x^-m,
* a Laurent polynomial,

where K runs over the states of the one-sided automata for the two halves of
u.  Lambda_i maps each atom to a single atom:

    Lambda_i(x^b K)    = x^-floor((i-b)/p) Lambda_{(i-b) mod p}(K)
    Lambda_i(x^b R(K)) = x^floor((b-i)/p)  R(Lambda_{(b-i) mod p}(K))

and Lambda_d(K) is the state reached from K on digit d.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import LaurentPoly, cartier_poly, frobenius_power, inverse_mod, laurent_mul
from .dfao import Dfao, compose_affine, minimize, prune
from .errors import BudgetExceeded, UsageError
from .lca import GeneratingPolynomial, as_phi
from .substitution import InitialCondition

RIGHT, LEFT = 0, 1


@dataclass(frozen=True)
class SeriesVector:
    """Numerator g of a kernel element, kept as sorted sparse tuples."""

    poly: tuple[tuple[int, int], ...] = ()
    atoms: tuple[tuple[tuple[int, int, int], int], ...] = ()

    def is_zero(self) -> bool:
        return not self.poly and not self.atoms

    def offsets(self) -> list[int]:
        return [a for (_, a, _), _ in self.atoms]

    def describe(self, names=("K", "RK")) -> str:
        parts = [f"{c}*x^{e}" for e, c in self.poly]
        parts += [f"{c}*x^{a}*{names[s]}[{k}]" for (s, a, k), c in self.atoms]
        return " + ".join(parts) or "0"


def _nonzero_states(a: Dfao) -> np.ndarray:
    """Mask of states from which some nonzero output is reachable."""
    alive = a.outputs != 0
    while True:
        nxt = alive | alive[a.trans].any(axis=1)
        if (nxt == alive).all():
            return alive
        alive = nxt


class _Base:
    """Lookup of K_m and Lambda_d(K) for one half of the initial condition."""

    def __init__(self, a: Dfao | None):
        self.a = a
        self.alive = _nonzero_states(a) if a is not None else np.zeros(0, bool)

    @lru_cache(maxsize=None)
    def value(self, k: int, m: int) -> int:
        if m < 0:
            return 0
        return self.a.eval_from(k, (m,))


@dataclass
class KernelClosureReport:
    states_before: int
    states_after: int | None
    offset_histogram: dict
    iterations: int
    max_abs_offset: int
    seconds: float

    def lines(self) -> list[str]:
        hist = " ".join(f"{k}:{v}" for k, v in sorted(self.offset_histogram.items()))
        return [
            f"closure_states: {self.states_before}",
            f"minimized_states: {self.states_after}",
            f"closure_iterations: {self.iterations}",
            f"max_abs_offset: {self.max_abs_offset}",
            f"offset_histogram: {hist}",
            f"seconds: {self.seconds:.3f}",
        ]


@dataclass(eq=False)
class KernelClosure:
    """[p,p] automaton whose states are exact kernel elements of a Z x N diagram."""

    phi: GeneratingPolynomial
    dfao: Dfao
    states: list[SeriesVector]
    right: _Base
    left: _Base
    report: KernelClosureReport
    _coeff_cache: dict = field(default_factory=dict, repr=False)

    @property
    def p(self) -> int:
        return self.phi.p

    def coefficient(self, g: SeriesVector, t: int) -> int:
        """Coefficient of x^t in g, i.e. W_{t,0} for the kernel element W."""
        p = self.p
        acc = 0
        for e, c in g.poly:
            if e == t:
                acc += c
        for (s, a, k), c in g.atoms:
            if s == RIGHT:
                acc += c * self.right.value(k, t - a)
            else:
                acc += c * self.left.value(k, a - t)
        return acc % p

    def row0(self, t: int) -> np.ndarray:
        """W_{t,0} for every state W."""
        if t not in self._coeff_cache:
            self._coeff_cache[t] = np.array([self.coefficient(g, t) for g in self.states], dtype=np.int64)
        return self._coeff_cache[t]


def initial_vector(init: InitialCondition, right: _Base, left: _Base) -> dict:
    acc: dict = {}
    r0 = init.right.initial
    if right.alive[r0]:
        acc[(RIGHT, 0, r0)] = 1
    poly: dict[int, int] = {}
    if init.left is not None:
        l0 = init.left.initial
        if left.alive[l0]:
            if init.alignment == "mirror":
                acc[(LEFT, 0, l0)] = 1
                poly[0] = -init.left.eval(0)
            else:
                acc[(LEFT, -1, l0)] = 1
    return _pack(poly, acc, init.p)


class _Observer:
    """Exact canonical keys for numerators.

    The state sequences of a non-minimal-looking DFAO can satisfy linear
    relations, so distinct atom combinations may denote the same series.
    Coordinates are monomials and atoms with |offset| <= bound; each Lambda_i
    sends a coordinate to a single coordinate (or to 0).  The coefficient of
    x^t is a functional generated from those at x^0 and x^-1 by the
    Lambda_i, so the span of that orbit (computed once, by elimination)
    separates series exactly, and its values on g form a canonical key.
    """

    POLY = 2

    def __init__(self, p: int, bound: int, right: "_Base", left: "_Base"):
        self.p = p
        coords = [(self.POLY, e, 0) for e in range(-bound, bound + 1)]
        for s, base in ((RIGHT, right), (LEFT, left)):
            if base.a is not None:
                coords += [(s, a, k) for a in range(-bound, bound + 1) for k in range(base.a.n_states)]
        self.col = {c: j for j, c in enumerate(coords)}
        D = len(coords)
        images = np.full((p, D), -1, dtype=np.int64)
        for j, (s, b, k) in enumerate(coords):
            for i in range(p):
                if s == self.POLY:
                    key = (s, (b - i) // p, 0) if (b - i) % p == 0 else None
                elif s == RIGHT:
                    q, d = divmod(i - b, p)
                    key = (s, -q, int(right.a.trans[k, d]))
                else:
                    q, d = divmod(b - i, p)
                    key = (s, q, int(left.a.trans[k, d]))
                if key is not None:
                    images[i, j] = self.col[key]

        def coeff(t):
            v = np.zeros(D, dtype=np.int64)
            for j, (s, b, k) in enumerate(coords):
                if s == self.POLY:
                    v[j] = int(b == t)
                elif s == RIGHT:
                    v[j] = right.value(k, t - b)
                else:
                    v[j] = left.value(k, b - t)
            return v % p

        rows: list[np.ndarray] = []
        pivots: list[int] = []
        queue = [coeff(0), coeff(-1)]
        while queue:
            v = queue.pop() % p
            for r, c in zip(rows, pivots):
                if v[c]:
                    v = (v - v[c] * r) % p
            nz = np.nonzero(v)[0]
            if not len(nz):
                continue
            v = (v * inverse_mod(int(v[nz[0]]), p)) % p
            rows.append(v)
            pivots.append(int(nz[0]))
            for i in range(p):
                pulled = np.where(images[i] >= 0, v[np.maximum(images[i], 0)], 0)
                queue.append(pulled)
        self.basis = np.array(rows, dtype=np.int64).reshape(len(rows), D)

    def key(self, g: SeriesVector) -> bytes:
        acc = np.zeros(len(self.basis), dtype=np.int64)
        for e, c in g.poly:
            acc += c * self.basis[:, self.col[(self.POLY, e, 0)]]
        for key, c in g.atoms:
            acc += c * self.basis[:, self.col[key]]
        return (acc % self.p).astype(np.int8).tobytes()


def _pack(poly: dict, atoms: dict, p: int) -> SeriesVector:
    pt = tuple(sorted((e, c % p) for e, c in poly.items() if c % p))
    at = tuple(sorted((key, c % p) for key, c in atoms.items() if c % p))
    return SeriesVector(pt, at)


KEY_MODES = ("exact", "structural")


def kernel_closure(phi, init: InitialCondition, budget: int = 200_000, keys: str = "exact") -> KernelClosure:
    """Close the numerator of f/(1 - phi y) under g -> Lambda_i(phi^j g).

    keys="exact" identifies numerators denoting the same series, so the
    closure is the kernel itself.  keys="structural" compares the sparse atom
    tuples only; it is exact as an automaton but may keep duplicate states,
    and can fail to terminate when the state sequences of the halves are
    linearly dependent.
    """
    if keys not in KEY_MODES:
        raise UsageError(f"keys must be one of {KEY_MODES}")
    t0 = time.perf_counter()
    phi = as_phi(phi)
    p = phi.p
    if init.p != p:
        raise UsageError(f"initial condition over F_{init.p} but phi over F_{p}")
    right, left = _Base(init.right), _Base(init.left)
    powers = [frobenius_power(phi.poly, j) for j in range(p)]
    rtrans = init.right.trans
    ltrans = init.left.trans if init.left is not None else None
    bound = max(phi.ell, phi.r) + 2

    def step(g: SeriesVector, i: int, j: int) -> SeriesVector:
        poly: dict[int, int] = {}
        atoms: dict = {}
        phij = powers[j]
        if g.poly:
            prod = laurent_mul(LaurentPoly(p, g.poly), phij)
            for e, c in cartier_poly(prod, i):
                poly[e] = c
        for (s, a, k), c in g.atoms:
            for e, alpha in phij:
                b = a + e
                if s == RIGHT:
                    q, d = divmod(i - b, p)
                    nk = int(rtrans[k, d])
                    if not right.alive[nk]:
                        continue
                    key = (RIGHT, -q, nk)
                else:
                    q, d = divmod(b - i, p)
                    nk = int(ltrans[k, d])
                    if not left.alive[nk]:
                        continue
                    key = (LEFT, q, nk)
                atoms[key] = atoms.get(key, 0) + c * alpha
        return _pack(poly, atoms, p)

    start = initial_vector(init, right, left)
    keyf = _Observer(p, bound, right, left).key if keys == "exact" else (lambda g: g)
    index = {keyf(start): 0}
    states = [start]
    rows = []
    head = 0
    iterations = 0
    while head < len(states):
        g = states[head]
        head += 1
        iterations += 1
        row = []
        for i in range(p):
            for j in range(p):
                h = step(g, i, j)
                if any(abs(a) > bound for a in h.offsets()) or any(abs(e) > bound for e, _ in h.poly):
                    raise AssertionError(f"offset exceeds {bound}: {h.describe()}")
                key = keyf(h)
                idx = index.get(key)
                if idx is None:
                    idx = len(states)
                    index[key] = idx
                    states.append(h)
                    if len(states) > budget:
                        raise BudgetExceeded(f"kernel closure exceeded {budget} states")
                row.append(idx)
        rows.append(row)
    hist = Counter(a for g in states for a in g.offsets())
    report = KernelClosureReport(
        len(states), None, dict(hist), iterations, max((abs(a) for a in hist), default=0), 0.0
    )
    clo = KernelClosure(phi, Dfao(p, (p, p), 0, np.zeros(len(states), dtype=np.int64), np.array(rows)), states, right, left, report)
    outs = clo.row0(0)
    clo.dfao = Dfao(p, (p, p), 0, outs, np.array(rows))
    report.seconds = time.perf_counter() - t0
    return clo


# [-p, p] conversion

ID, RHO, SIGMA_INV, RHO_SIGMA_INV = range(4)


def _negp_table(p: int):
    """(tag, i) -> (new tag, source digit) following the reflection/shift identities."""
    table = {}
    for i in range(p):
        table[(ID, i)] = (RHO, i)
        table[(RHO, i)] = (ID, 0) if i == 0 else (SIGMA_INV, p - i)
        table[(SIGMA_INV, i)] = (RHO_SIGMA_INV, p - 1) if i == 0 else (RHO, i - 1)
        table[(RHO_SIGMA_INV, i)] = (SIGMA_INV, p - 1 - i)
    return table


def to_negp(source, minimal: bool = True) -> Dfao:
    """Automaton reading m in base -p and n in base p.

    `source` is a KernelClosure (exact values at m = -1 are available) or a
    plain [p,p] Dfao, which is then taken to vanish outside N x N.
    """
    if isinstance(source, KernelClosure):
        a = source.dfao
        out0, outm1 = source.row0(0), source.row0(-1)
    elif isinstance(source, Dfao):
        a = source
        if a.bases != (a.p, a.p):
            raise UsageError("to_negp needs a [p,p] automaton")
        out0, outm1 = a.outputs, np.zeros(a.n_states, dtype=np.int64)
    else:
        raise UsageError("to_negp needs a KernelClosure or a Dfao")
    p = a.p
    table = _negp_table(p)
    start = (ID, a.initial)
    index = {start: 0}
    states = [start]
    rows = []
    head = 0
    while head < len(states):
        tag, w = states[head]
        head += 1
        row = []
        for i in range(p):
            ntag, si = table[(tag, i)]
            for j in range(p):
                key = (ntag, int(a.trans[w, si * p + j]))
                idx = index.get(key)
                if idx is None:
                    idx = len(states)
                    index[key] = idx
                    states.append(key)
                row.append(idx)
        rows.append(row)
    outs = [int(out0[w]) if tag in (ID, RHO) else int(outm1[w]) for tag, w in states]
    d = Dfao(p, (-p, p), 0, np.array(outs), np.array(rows), meta={"pre_min_states": len(states)})
    return minimize(d) if minimal else d


# shear


def shear_closure(clo: KernelClosure, r: int, s: int = 0, minimal: bool = True) -> Dfao:
    """[p,p] automaton for V_{m,n} = U_{m-s-rn, n} on N x N.

    A state (W, t) stands for (m, n) -> W_{m-t-rn, n}; its output is W_{-t,0}.
    """
    if r < 0 or s < 0:
        raise UsageError("shear parameters must be nonnegative")
    a = clo.dfao
    p = a.p
    start = (a.initial, s)
    index = {start: 0}
    states = [start]
    rows = []
    head = 0
    while head < len(states):
        w, t = states[head]
        head += 1
        row = []
        for ip in range(p):
            for j in range(p):
                q, i = divmod(ip - t - r * j, p)
                key = (int(a.trans[w, i * p + j]), -q)
                idx = index.get(key)
                if idx is None:
                    idx = len(states)
                    index[key] = idx
                    states.append(key)
                row.append(idx)
        rows.append(row)
    outs = [int(clo.row0(-t)[w]) for w, t in states]
    d = Dfao(p, (p, p), 0, np.array(outs), np.array(rows), meta={"pre_min_states": len(states)})
    return minimize(d) if minimal else d


def shear_dfao(a: Dfao, r: int, s: int = 0, minimal: bool = True) -> Dfao:
    """Shear of any 2-D automaton by a carry transducer on the m axis."""
    if a.arity != 2:
        raise UsageError("shear needs a 2-D automaton")
    d = compose_affine(a, 0, (1, -r), -s, a.bases)
    return minimize(d) if minimal else d


def shear_automaton(a, r: int, s: int = 0, minimal: bool = True) -> Dfao:
    if isinstance(a, KernelClosure):
        return shear_closure(a, r, s, minimal)
    return shear_dfao(a, r, s, minimal)


# top level


def build_st_automaton(phi, init: InitialCondition, axes: str = "negp,p", budget: int = 200_000,
                       keys: str = "exact"):
    """Minimal automaton for ST_phi(u) plus the closure report.

    axes "p,p" gives the restriction to N x N; "negp,p" the full Z x N diagram.
    """
    clo = kernel_closure(phi, init, budget, keys)
    t0 = time.perf_counter()
    if axes.replace(" ", "") == "p,p":
        out = minimize(clo.dfao)
    elif axes.replace(" ", "") == "negp,p":
        out = to_negp(clo)
    else:
        raise UsageError(f"unsupported axes {axes!r}; use 'p,p' or 'negp,p'")
    clo.report.states_after = out.n_states
    clo.report.seconds += time.perf_counter() - t0
    return out, clo.report


def reflect_state(a: Dfao) -> int:
    """State of a [-p,p] automaton reached on the zero tuple; for U with
    Lambda_{0,0} U = U this is the reflection (U_{-m,n})."""
    return int(a.trans[a.initial, 0])
