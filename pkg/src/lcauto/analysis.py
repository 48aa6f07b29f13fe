"""Power-freeness, constant configurations, frequencies and pattern complexity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import LaurentPoly
from .dfao import Dfao, compose_affine, decode_word, minimize
from .errors import BudgetExceeded, UsageError
from .lca import GeneratingPolynomial, SpacetimeGrid, as_phi
from .substitution import (
    Substitution,
    coded_prefix,
    fixed_point_prefix,
    has_coincidence,
    incidence_matrix,
    is_bijective,
    is_primitive,
    parity_substitution,
)


class Inconclusive(BudgetExceeded):
    """A bounded decision ran out of budget; no verdict either way."""


@dataclass(frozen=True)
class PowerWitness:
    m: int
    n: int
    period: int
    M: int


# scanning


def _power_starts(row: np.ndarray, period: int, M: int) -> np.ndarray:
    need = (M - 1) * period
    if len(row) < need + period:
        return np.zeros(0, dtype=np.int64)
    eq = row[:-period] == row[period:]
    # run length of the equality mask, vectorised through the positions of False
    n = len(eq)
    idx = np.arange(n)
    false_pos = np.where(~eq, idx, n)
    next_false = np.minimum.accumulate(false_pos[::-1])[::-1]
    run = next_false - idx
    return np.nonzero(run >= need)[0]


def find_powers(grid: SpacetimeGrid, M: int, max_period: int, limit: int | None = None,
                periods: Sequence[int] | None = None) -> list[PowerWitness]:
    """Every (position, period) of an M-th power w^M with |w| <= max_period, row by row."""
    if M < 2 or max_period < 1:
        raise UsageError("need M >= 2 and max_period >= 1")
    out = []
    periods = range(1, max_period + 1) if periods is None else periods
    for period in periods:
        for n in range(grid.n0, grid.n1 + 1):
            for i in _power_starts(grid.row(n).astype(np.int64), period, M):
                out.append(PowerWitness(grid.m0 + int(i), n, period, M))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def find_powers_1d(word, M: int, max_period: int, limit: int | None = None) -> list[PowerWitness]:
    arr = np.asarray(word, dtype=np.int64)
    out = []
    for period in range(1, max_period + 1):
        for i in _power_starts(arr, period, M):
            out.append(PowerWitness(int(i), 0, period, M))
            if limit is not None and len(out) >= limit:
                return out
    return out


def max_power_runs(word, max_period: int) -> dict[int, int]:
    """Longest run of u_i = u_{i+l} for each period l."""
    arr = np.asarray(word, dtype=np.int64)
    out = {}
    for period in range(1, max_period + 1):
        eq = arr[:-period] == arr[period:]
        if not len(eq):
            out[period] = 0
            continue
        d = np.diff(np.concatenate([[0], eq.astype(np.int8), [0]]))
        starts, ends = np.nonzero(d == 1)[0], np.nonzero(d == -1)[0]
        out[period] = int((ends - starts).max()) if len(starts) else 0
    return out


def empirical_power_bound(word, max_period: int = 64) -> int:
    """Smallest M such that the word has no M-th power with period <= max_period."""
    runs = max_power_runs(word, max_period)
    worst = max(runs[l] // l + 1 for l in runs)  # largest exponent that occurs
    return worst + 1


# offset automata and the bounded decision


MAX_OFFSET = 4096


def offset_automaton(a: Dfao, c: int, axis: int = 0) -> Dfao:
    """m -> a(m + c) on the chosen axis (0 outside the domain of a base-p axis)."""
    if abs(c) > MAX_OFFSET:
        raise UsageError(f"offsets are limited to |c| <= {MAX_OFFSET}")
    if not 0 <= axis < a.arity:
        raise UsageError(f"axis {axis} out of range")
    coeffs = [0] * a.arity
    coeffs[axis] = 1
    return minimize(compose_affine(a, axis, coeffs, c, a.bases))


def decide_power_fixed(a: Dfao, M: int, max_period: int, budget: int = 2_000_000,
                       periods: Sequence[int] | None = None) -> PowerWitness | None:
    """Exact search for a horizontal M-th power with period <= max_period.

    For each period l the product of the offset automata for shifts
    0..Ml-1 is explored breadth first; a reachable product state whose
    outputs repeat with period l is a power, and BFS order makes its
    representation the shortest.  Raises Inconclusive when the budget runs out.
    """
    if M < 2 or max_period < 1:
        raise UsageError("need M >= 2 and max_period >= 1")
    periods = range(1, max_period + 1) if periods is None else periods
    autos: list[Dfao] = []
    for period in periods:
        while len(autos) < M * period:
            autos.append(offset_automaton(a, len(autos), 0))
        w = _search_period(a, autos[: M * period], period, budget)
        if w is not None:
            return w
    return None


def _search_period(a: Dfao, autos: list[Dfao], period: int, budget: int) -> PowerWitness | None:
    K = len(autos)
    M = K // period
    trans = [d.trans for d in autos]
    outs = [d.outputs for d in autos]

    def is_power(states: np.ndarray) -> np.ndarray:
        vals = np.column_stack([outs[c][states[:, c]] for c in range(K)])
        return (vals[:, : K - period] == vals[:, period:]).all(axis=1)

    start = np.array([[d.initial for d in autos]], dtype=np.int64)
    seen = {start[0].tobytes(): (None, None)}
    frontier = start
    n_sym = a.n_symbols
    while len(frontier):
        hits = np.nonzero(is_power(frontier))[0]
        if len(hits):
            key = frontier[hits[0]].tobytes()
            word = []
            while seen[key][0] is not None:
                key, sym = seen[key]
                word.append(sym)
            pt = decode_word(word[::-1], a.p, a.bases)
            return PowerWitness(pt[0], pt[1] if a.arity > 1 else 0, period, M)
        nxt = []
        for sym in range(n_sym):
            cand = np.column_stack([trans[c][frontier[:, c], sym] for c in range(K)])
            for src, row in zip(frontier, cand):
                kb = row.tobytes()
                if kb not in seen:
                    seen[kb] = (src.tobytes(), sym)
                    nxt.append(row)
        if len(seen) > budget:
            raise Inconclusive(f"offset product exceeded {budget} states at period {period}")
        frontier = np.array(nxt, dtype=np.int64).reshape(-1, K)
    return None


# certificates


@dataclass(frozen=True)
class PowerFreeCertificate:
    issued: bool
    theorem: str
    hypotheses: tuple[tuple[str, bool], ...]
    bound_expression: str = ""
    empirical_M: int | None = None
    bound: int | None = None
    search_window: int = 0
    max_period: int = 0

    def lines(self) -> list[str]:
        out = [f"issued: {self.issued}", f"theorem: {self.theorem}"]
        out += [f"hypothesis {name}: {ok}" for name, ok in self.hypotheses]
        if self.issued:
            out += [
                f"bound_expression: {self.bound_expression}",
                f"empirical_M: {self.empirical_M} (empirical, periods <= {self.max_period}, prefix {self.search_window})",
                f"power_free_exponent: {self.bound}",
            ]
        return out


def certify_power_free(theta: Substitution, seed, phi, prefix_len: int = 100_000,
                       max_period: int = 64) -> PowerFreeCertificate:
    """Check the hypotheses of the two power-freeness theorems syntactically."""
    phi = as_phi(phi)
    p = phi.p
    seed = theta.letter(seed)
    x_plus_1 = LaurentPoly.from_dict(3, {1: 1, 0: 1}) if p == 3 else None
    prefix = None

    def u():
        nonlocal prefix
        if prefix is None:
            prefix = coded_prefix(theta, seed, prefix_len)
        return prefix

    h65 = [
        ("p = 3", p == 3 and theta.p == 3),
        ("phi = x + 1", x_plus_1 is not None and phi.poly == x_plus_1),
        ("primitive", is_primitive(theta)),
        ("bijective", is_bijective(theta)),
    ]
    if all(ok for _, ok in h65):
        h65.append(("aperiodic fixed point", eventual_period_check(u()[:20_000], 200, 1000) is None))
    if all(ok for _, ok in h65):
        M = empirical_power_bound(u(), max_period)
        return PowerFreeCertificate(True, "T6.5", tuple(h65), "9*M", M, 9 * M, prefix_len, max_period)

    L = phi.n_terms
    par = parity_substitution(theta.p) if theta.p == p else None
    h68 = [
        ("parity substitution", par is not None and theta.images == par.images and theta.coding == par.coding),
        (f"p does not divide L = {L}", L % p != 0),
    ]
    if all(ok for _, ok in h68):
        M = empirical_power_bound(u(), max_period)
        bound = max((phi.ell + phi.r) * p * p * M, math.ceil(Fraction(p * p, p - 1) * (2 * M - 1)))
        return PowerFreeCertificate(
            True, "T6.8", tuple(h68), "max((l+r)*p^2*M, ceil(p^2/(p-1)*(2M-1)))", M, bound, prefix_len, max_period
        )
    return PowerFreeCertificate(False, "none", tuple(h65[:4] + h68))


# constant configurations


@dataclass(frozen=True)
class ZeroBlock:
    row: int
    start: int
    length: int
    source: str


@dataclass
class ConstantConfigPrediction:
    verdict: str  # "yes" or "unknown"
    coefficient_sum: int
    normalized_phi: str
    coincidence: object = None
    word: tuple | None = None
    word_position: int | None = None
    predicted_blocks: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"verdict: {self.verdict}", f"coefficient_sum: {self.coefficient_sum}",
               f"normalized_phi: {self.normalized_phi}"]
        if self.coincidence is not None:
            c = self.coincidence
            out.append(f"coincidence: depth={c.depth} column={c.column} letter={c.letter}")
        if self.word is not None:
            out.append(f"word: {self.word} at {self.word_position}")
        out += [f"zero_block: row={b.row} m=[{b.start},{b.start + b.length}) via {b.source}"
                for b in self.predicted_blocks]
        return out


def normalize_left_radius(phi) -> GeneratingPolynomial:
    """Shift phi by x^-ell so that its left radius is 0 (shears the diagram by ell per row)."""
    phi = as_phi(phi)
    return GeneratingPolynomial(phi.poly.shift(-phi.ell))


def detect_constant_config(theta: Substitution, seed, phi, prefix_len: int = 100_000,
                           max_j: int = 4) -> ConstantConfigPrediction:
    """Sufficient criteria for the zero configuration to lie in the orbit closure.

    Blocks are predicted for the normalized rule, i.e. in sheared coordinates
    when phi has a positive left radius.
    """
    phi = as_phi(phi)
    norm = normalize_left_radius(phi)
    s = norm.coefficient_sum()
    pred = ConstantConfigPrediction("unknown", s, str(norm))
    if s != 0:
        return pred
    p, r = norm.p, norm.r
    seed = theta.letter(seed)
    wit = has_coincidence(theta)
    if wit is not None:
        pred.coincidence = wit
        k, L = wit.depth, wit.column
        for j in range(0, max_j + 1):
            size = p ** (k * j)
            pred.predicted_blocks.append(ZeroBlock(p ** (k * (j + 1)), L * size, size, "coincidence"))
    letters = fixed_point_prefix(theta, seed, prefix_len)
    nz = [i for i in range(r + 1) if norm.alpha(i) != 0]
    arr = np.array(letters, dtype=np.int64)
    if len(arr) > r:
        win = np.lib.stride_tricks.sliding_window_view(arr, r + 1)[:, nz]
        ok = np.nonzero((win == win[:, :1]).all(axis=1))[0]
        if len(ok):
            pos = int(ok[0])
            pred.word = tuple(theta.names[c] for c in letters[pos : pos + r + 1])
            pred.word_position = pos
            for j in range(0, max_j + 1):
                pred.predicted_blocks.append(ZeroBlock(p**j, pos * p**j, p**j, "word"))
    if pred.coincidence is not None or pred.word is not None:
        pred.verdict = "yes"
    return pred


# frequencies


def letter_frequencies(theta: Substitution) -> tuple[Fraction, ...]:
    """Normalized right Perron vector of the incidence matrix, exactly."""
    import sympy

    if not is_primitive(theta):
        raise UsageError("letter frequencies need a primitive substitution")
    M = sympy.Matrix(incidence_matrix(theta).tolist())
    p = len(theta.images[0])
    basis = (M - p * sympy.eye(theta.size)).nullspace()
    if len(basis) != 1:
        raise UsageError("eigenvalue p is not simple")
    v = basis[0]
    total = sum(v)
    return tuple(Fraction(int((x / total).p), int((x / total).q)) for x in v)


def empirical_frequencies(word, size: int) -> np.ndarray:
    counts = np.bincount(np.asarray(word, dtype=np.int64), minlength=size)
    return counts / counts.sum()


# complexity

_HASH_BASES = (np.uint64(0x9E3779B97F4A7C15), np.uint64(0xC2B2AE3D27D4EB4F))
_HASH_BASES2 = (np.uint64(0x165667B19E3779F9), np.uint64(0x27D4EB2F165667C5))


def _rolling(arr: np.ndarray, k: int, base: np.uint64, axis: int) -> np.ndarray:
    """Polynomial hash of each length-k window along axis, wrapping mod 2^64."""
    a = np.moveaxis(arr, axis, -1).astype(np.uint64)
    n = a.shape[-1]
    pref = np.zeros(a.shape[:-1] + (n + 1,), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for i in range(n):
            pref[..., i + 1] = pref[..., i] * base + a[..., i] + np.uint64(1)
        bk = np.uint64(1)
        for _ in range(k):
            bk = bk * base
        out = pref[..., k:] - pref[..., : n - k + 1] * bk
    return np.moveaxis(out, -1, axis)


def complexity(grid: SpacetimeGrid, m: int, n: int) -> int:
    """Distinct m x n blocks (m wide, n tall) inside the window.

    Exact for the window (up to 128-bit hash collisions), hence a lower bound
    for the full configuration.
    """
    if m < 1 or n < 1 or m > grid.width or n > grid.height:
        raise UsageError("block larger than the window")
    keys = []
    for b1, b2 in zip(_HASH_BASES, _HASH_BASES2):
        h = _rolling(grid.values, m, b1, axis=1)
        h = _rolling(h, n, b2, axis=0)
        keys.append(h.ravel())
    pairs = np.ascontiguousarray(np.stack(keys, axis=1)).view(np.dtype((np.void, 16)))
    return int(len(np.unique(pairs)))


@dataclass(frozen=True)
class ComplexityFit:
    sizes: tuple[int, ...]
    counts: tuple[int, ...]
    K: float
    monotone: bool
    within_bound: bool

    @property
    def ok(self) -> bool:
        return self.monotone and self.within_bound


def fit_quadratic(grid: SpacetimeGrid, sizes=(4, 8, 16, 32, 64), slack: float = 2.0) -> ComplexityFit:
    counts = [complexity(grid, s, s) for s in sizes]
    x = np.array(sizes, dtype=float) ** 2
    y = np.array(counts, dtype=float)
    # fit in log space: K is the geometric mean of c/m^2
    K = float(np.exp(np.mean(np.log(y / x))))
    mono = all(a <= b for a, b in zip(counts, counts[1:]))
    within = bool((y <= slack * K * x).all())
    return ComplexityFit(tuple(sizes), tuple(counts), K, mono, within)


# periodicity


def eventual_period_check(prefix, max_period: int, max_preperiod: int) -> tuple[int, int] | None:
    """Least period (and its least preperiod) consistent with the prefix, or None."""
    arr = np.asarray(prefix, dtype=np.int64)
    if len(arr) <= max_preperiod + 2 * max_period:
        raise UsageError("prefix too short for the requested bounds")
    for period in range(1, max_period + 1):
        bad = np.nonzero(arr[:-period] != arr[period:])[0]
        pre = int(bad[-1]) + 1 if len(bad) else 0
        if pre <= max_preperiod:
            return (pre, period)
    return None
