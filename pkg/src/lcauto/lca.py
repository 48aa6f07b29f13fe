"""Exact evolution of linear cellular automata on finite windows.

This is the brute-force oracle that every automaton in the package is checked
against.  Grids are stored as uint8 arrays indexed [n - n0, m - m0].
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .algebra import LaurentPoly, check_prime, inverse_mod, parse_poly
from .dfao import Dfao
from .errors import UsageError

MAX_CELLS = 1 << 26
GRID_MAGIC = b"STG1"


@dataclass(frozen=True)
class GeneratingPolynomial:
    """phi(x) = sum alpha_i x^-i; the rule is (Phi u)_m = sum alpha_i u_{m+i}.

    ell = max(0, largest exponent) and r = max(0, -smallest exponent), so the
    neighbourhood of cell m is [m - ell, m + r].
    """

    poly: LaurentPoly

    def __post_init__(self):
        if not self.poly:
            raise UsageError("generating polynomial must be nonzero")

    @classmethod
    def parse(cls, text: str, p: int) -> "GeneratingPolynomial":
        return cls(parse_poly(text, p))

    @property
    def p(self) -> int:
        return self.poly.p

    @property
    def ell(self) -> int:
        return max(0, self.poly.max_exp)

    @property
    def r(self) -> int:
        return max(0, -self.poly.min_exp)

    def alpha(self, i: int) -> int:
        return self.poly.coeff(-i)

    @property
    def exact_radii(self) -> bool:
        return self.alpha(-self.ell) != 0 and self.alpha(self.r) != 0

    @property
    def n_terms(self) -> int:
        return len(self.poly)

    def coefficient_sum(self) -> int:
        return self.poly.evaluate_at_one()

    def __str__(self) -> str:
        return str(self.poly)


def as_phi(phi, p: int | None = None) -> GeneratingPolynomial:
    if isinstance(phi, GeneratingPolynomial):
        return phi
    if isinstance(phi, LaurentPoly):
        return GeneratingPolynomial(phi)
    if isinstance(phi, str) and p is not None:
        return GeneratingPolynomial.parse(phi, p)
    raise UsageError(f"cannot interpret {phi!r} as a generating polynomial")


class RowSource(Protocol):
    def values(self, m0: int, m1: int) -> np.ndarray: ...


@dataclass(frozen=True)
class ArrayRow:
    """Finitely supported row: values on [m0, m0 + len) and `fill` elsewhere."""

    data: tuple[int, ...]
    m0: int = 0
    fill: int = 0

    def values(self, m0: int, m1: int) -> np.ndarray:
        out = np.full(m1 - m0 + 1, self.fill, dtype=np.int64)
        arr = np.array(self.data, dtype=np.int64)
        lo, hi = max(m0, self.m0), min(m1, self.m0 + len(arr) - 1)
        if lo <= hi:
            out[lo - m0 : hi - m0 + 1] = arr[lo - self.m0 : hi - self.m0 + 1]
        return out


@dataclass(frozen=True)
class ConeSupport:
    """{(m, n): n >= 0, -m - r n <= t}."""

    r: int
    t: int = 0

    def __post_init__(self):
        if self.r < 0 or self.t < 0:
            raise UsageError("cone parameters must be nonnegative")

    def contains(self, m, n):
        m, n = np.asarray(m), np.asarray(n)
        return (n >= 0) & (-m - self.r * n <= self.t)


@dataclass(frozen=True, eq=False)
class SpacetimeGrid:
    p: int
    m0: int
    m1: int
    n0: int
    n1: int
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        check_prime(self.p)
        shape = (self.n1 - self.n0 + 1, self.m1 - self.m0 + 1)
        if shape[0] <= 0 or shape[1] <= 0:
            raise UsageError("empty window")
        v = np.asarray(self.values, dtype=np.uint8)
        if v.shape != shape:
            raise UsageError(f"values shape {v.shape} does not match window {shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def window(self) -> tuple[int, int, int, int]:
        return (self.m0, self.m1, self.n0, self.n1)

    @property
    def width(self) -> int:
        return self.m1 - self.m0 + 1

    @property
    def height(self) -> int:
        return self.n1 - self.n0 + 1

    def __getitem__(self, mn) -> int:
        m, n = mn
        if not (self.m0 <= m <= self.m1 and self.n0 <= n <= self.n1):
            raise UsageError(f"({m}, {n}) lies outside the window")
        return int(self.values[n - self.n0, m - self.m0])

    def at(self, ms, ns) -> np.ndarray:
        return self.values[np.asarray(ns) - self.n0, np.asarray(ms) - self.m0]

    def row(self, n: int) -> np.ndarray:
        return self.values[n - self.n0]

    def sub(self, m0, m1, n0, n1) -> "SpacetimeGrid":
        if m0 < self.m0 or m1 > self.m1 or n0 < self.n0 or n1 > self.n1:
            raise UsageError("sub-window exceeds the grid")
        v = self.values[n0 - self.n0 : n1 - self.n0 + 1, m0 - self.m0 : m1 - self.m0 + 1]
        return SpacetimeGrid(self.p, m0, m1, n0, n1, v, self.provenance)

    def local_rule_violations(self, phi: GeneratingPolynomial) -> int:
        """Number of interior cells where row n+1 differs from Phi(row n)."""
        bad = 0
        for n in range(self.n0, self.n1):
            nxt = evolve_row(phi, self.row(n))
            bad += int(np.count_nonzero(nxt != self.row(n + 1)[phi.ell : self.width - phi.r]))
        return bad


def _check_size(width: int, height: int) -> None:
    if width * height > MAX_CELLS:
        raise UsageError(f"grid of {width}x{height} cells exceeds the {MAX_CELLS}-cell limit")


def evolve_row(phi: GeneratingPolynomial, row) -> np.ndarray:
    """One step of the rule; output covers [m0 + ell, m1 - r] of the input window."""
    row = np.asarray(row, dtype=np.int64)
    ell, r = phi.ell, phi.r
    L = len(row) - ell - r
    if L <= 0:
        raise UsageError(f"row of length {len(row)} is too short for radii ({ell}, {r})")
    out = np.zeros(L, dtype=np.int64)
    for e, c in phi.poly:
        start = ell - e  # alpha_i with i = -e sits at offset ell + i
        out += c * row[start : start + L]
    return out % phi.p


def generate_grid(phi, init: RowSource, window, provenance: str = "") -> SpacetimeGrid:
    """Rows 0..n1 of the diagram, exact on [m0, m1]."""
    phi = as_phi(phi)
    m0, m1, n0, n1 = window
    if n0 != 0:
        raise UsageError("generate_grid windows start at n = 0; use generate_grid_zxz below row 0")
    _check_size(m1 - m0 + 1, n1 + 1)
    lo, hi = m0 - phi.ell * n1, m1 + phi.r * n1
    row = np.asarray(init.values(lo, hi), dtype=np.int64) % phi.p
    out = np.zeros((n1 + 1, m1 - m0 + 1), dtype=np.uint8)
    for n in range(n1 + 1):
        off = m0 - (lo + phi.ell * n)
        out[n] = row[off : off + m1 - m0 + 1]
        if n < n1:
            row = evolve_row(phi, row)
    return SpacetimeGrid(phi.p, m0, m1, 0, n1, out, provenance)


def extend_backward(phi, target, target_m0: int, seed: Sequence[int], seed_m0: int) -> tuple[np.ndarray, int]:
    """The unique v with Phi(v) = target and v = seed on [seed_m0, seed_m0 + ell + r).

    Returns (v, v_m0) with v covering [target_m0 - ell, target_m1 + r].
    """
    phi = as_phi(phi)
    p, ell, r = phi.p, phi.ell, phi.r
    if not phi.exact_radii:
        raise UsageError("extreme coefficients of phi vanish; radii are not exact")
    w = ell + r
    if len(seed) != w:
        raise UsageError(f"seed must have length ell + r = {w}")
    target = np.asarray(target, dtype=np.int64) % p
    t1 = target_m0 + len(target) - 1
    lo, hi = target_m0 - ell, t1 + r
    if seed_m0 < lo or seed_m0 + w - 1 > hi:
        raise UsageError("seed columns lie outside the determined range")
    if w == 0:
        return target.copy(), target_m0
    v = np.zeros(hi - lo + 1, dtype=np.int64)
    v[seed_m0 - lo : seed_m0 - lo + w] = np.asarray(seed, dtype=np.int64) % p
    coeffs = [(-e, c) for e, c in phi.poly]  # (i, alpha_i)
    inv_r, inv_l = inverse_mod(phi.alpha(r), p), inverse_mod(phi.alpha(-ell), p)
    # rightward: cell m + r from cells m - ell .. m + r - 1
    for m in range(seed_m0 + ell, t1 + 1):
        acc = target[m - target_m0]
        for i, c in coeffs:
            if i != r:
                acc -= c * v[m + i - lo]
        v[m + r - lo] = (acc * inv_r) % p
    # leftward: cell m - ell from cells m - ell + 1 .. m + r
    for m in range(seed_m0 + ell - 1, target_m0 - 1, -1):
        acc = target[m - target_m0]
        for i, c in coeffs:
            if i != -ell:
                acc -= c * v[m + i - lo]
        v[m - ell - lo] = (acc * inv_l) % p
    return v, lo


@dataclass(frozen=True)
class BoundaryData:
    """Row 0 plus ell + r column sequences below it.

    Column k holds U_{offset_base + k, -j} = columns[k](j) for j >= 1.
    """

    row0: RowSource
    columns: tuple = ()
    offset_base: int = 0

    def column_values(self, k: int, j: int) -> int:
        col = self.columns[k]
        return int(col.eval(j)) if isinstance(col, Dfao) else int(col(j))


def generate_grid_zxz(phi, boundary: BoundaryData, window, provenance: str = "") -> SpacetimeGrid:
    phi = as_phi(phi)
    m0, m1, n0, n1 = window
    w = phi.ell + phi.r
    if len(boundary.columns) != w:
        raise UsageError(f"boundary needs exactly ell + r = {w} column sequences")
    _check_size(m1 - m0 + 1, n1 - n0 + 1)
    ob = boundary.offset_base
    upper = generate_grid(phi, boundary.row0, (m0, m1, 0, max(n1, 0)))
    out = np.zeros((n1 - n0 + 1, m1 - m0 + 1), dtype=np.uint8)
    if n1 >= 0:
        out[max(0, -n0) :] = upper.values[max(n0, 0) : n1 + 1]
    if n0 < 0:
        lo, hi = min(m0, ob), max(m1, ob + w - 1)
        lower = _lower_half(phi, boundary, lo, hi, -n0)
        top = min(n1, -1)
        out[: top - n0 + 1] = lower[n0 + (-n0) : top + (-n0) + 1, m0 - lo : m1 - lo + 1]
    return SpacetimeGrid(phi.p, m0, m1, n0, n1, out, provenance)


def _lower_half(phi: GeneratingPolynomial, boundary: BoundaryData, lo: int, hi: int, depth: int) -> np.ndarray:
    """Rows -depth..0 on [lo, hi], indexed [n + depth, m - lo].

    Same recurrences as extend_backward, but swept one column at a time with
    all rows at once: column m + r (or m - ell) follows from the columns
    already known and from column m one row higher.
    """
    p, ell, r = phi.p, phi.ell, phi.r
    if not phi.exact_radii:
        raise UsageError("extreme coefficients of phi vanish; radii are not exact")
    w, ob = ell + r, boundary.offset_base
    if ob < lo or ob + w - 1 > hi:
        raise UsageError("seed columns lie outside the computed range")
    U = np.zeros((depth + 1, hi - lo + 1), dtype=np.int64)
    U[depth] = np.asarray(boundary.row0.values(lo, hi), dtype=np.int64) % p
    js = np.arange(depth, 0, -1)  # row index k holds n = k - depth, i.e. j = depth - k
    for k in range(w):
        col = boundary.columns[k]
        if isinstance(col, Dfao):
            U[:depth, ob + k - lo] = col.eval_many(js[:, None])
        else:
            U[:depth, ob + k - lo] = [col(int(j)) for j in js]
    U[:depth] %= p
    coeffs = [(-e, c) for e, c in phi.poly]
    inv_r, inv_l = inverse_mod(phi.alpha(r), p), inverse_mod(phi.alpha(-ell), p)
    for m in range(ob + ell, hi - r + 1):
        _fill_column(U, m + r - lo, m - lo, [(m + i - lo, c) for i, c in coeffs if i != r], inv_r, p)
    for m in range(ob + ell - 1, lo + ell - 1, -1):
        _fill_column(U, m - ell - lo, m - lo, [(m + i - lo, c) for i, c in coeffs if i != -ell], inv_l, p)
    return U


def _fill_column(U: np.ndarray, dst: int, tgt: int, terms, inv: int, p: int) -> None:
    """Solve inv^-1 * U[k, dst] = U[k+1, tgt] - sum c * U[k, col] for all rows k < depth."""
    depth = U.shape[0] - 1
    S = np.zeros(depth, dtype=np.int64)
    for col, c in terms:
        S += c * U[:depth, col]
    if dst != tgt:
        U[:depth, dst] = ((U[1:, tgt] - S) * inv) % p
        return
    # the column feeds itself one row down: x_k = inv * (x_{k+1} - S_k)
    # so inv^-k x_k = inv^-D x_D - sum_{t>=k} inv^-t S_t
    inv_pows = np.ones(depth + 1, dtype=np.int64)
    for k in range(1, depth + 1):
        inv_pows[k] = inv_pows[k - 1] * inv % p
    c = inverse_mod(inv, p)
    neg = np.ones(depth + 1, dtype=np.int64)  # neg[k] = inv^-k = c^k
    for k in range(1, depth + 1):
        neg[k] = neg[k - 1] * c % p
    terms_t = (neg[:depth] * S) % p
    suffix = np.cumsum(terms_t[::-1])[::-1] % p
    xk = (neg[depth] * U[depth, tgt] - suffix) % p
    U[:depth, dst] = (xk * inv_pows[:depth]) % p


def shear_grid(grid: SpacetimeGrid, r: int, s: int, window) -> SpacetimeGrid:
    """V_{m,n} = U_{m - s - r n, n} on the requested window."""
    m0, m1, n0, n1 = window
    ms, ns = np.meshgrid(np.arange(m0, m1 + 1), np.arange(n0, n1 + 1))
    src = ms - s - r * ns
    if src.min() < grid.m0 or src.max() > grid.m1 or n0 < grid.n0 or n1 > grid.n1:
        raise UsageError("source grid does not cover the sheared window")
    return SpacetimeGrid(grid.p, m0, m1, n0, n1, grid.at(src, ns), grid.provenance + f" sheared r={r} s={s}")


def project_row(grid: SpacetimeGrid, n: int) -> tuple[np.ndarray, int]:
    if not grid.n0 <= n <= grid.n1:
        raise UsageError(f"row {n} outside the window")
    return grid.row(n).copy(), grid.m0


def grid_from_dfao(a: Dfao, window, provenance: str = "") -> SpacetimeGrid:
    m0, m1, n0, n1 = window
    return SpacetimeGrid(a.p, m0, m1, n0, n1, a.eval_grid(m0, m1, n0, n1), provenance)


def write_grid(grid: SpacetimeGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<5i", grid.p, grid.m0, grid.m1, grid.n0, grid.n1))
        fh.write(grid.values.tobytes())


def read_grid(path) -> SpacetimeGrid:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != GRID_MAGIC:
        raise UsageError(f"{path}: not a grid file")
    p, m0, m1, n0, n1 = struct.unpack("<5i", blob[4:24])
    vals = np.frombuffer(blob[24:], dtype=np.uint8)
    shape = (n1 - n0 + 1, m1 - m0 + 1)
    if vals.size != shape[0] * shape[1]:
        raise UsageError(f"{path}: truncated grid data")
    return SpacetimeGrid(p, m0, m1, n0, n1, vals.reshape(shape))
