"""Truncated power-series checks of algebraic relations over F_p.

Relations are searched in Ore form sum_i A_i(x) f^(p^i) = 0, which is linear
in the unknown coefficients because f^(p^i) = f(x^(p^i)).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import LaurentPoly, inverse_mod
from .errors import UsageError


def as_series(f, N: int, p: int | None = None) -> np.ndarray:
    """Coefficients f_0..f_{N-1} as an int64 array."""
    if isinstance(f, LaurentPoly):
        if f.terms and f.min_exp < 0:
            raise UsageError("power series prefix has negative exponents")
        out = np.zeros(N, dtype=np.int64)
        for e, c in f:
            if e < N:
                out[e] = c
        return out
    arr = np.asarray(f, dtype=np.int64)
    if len(arr) < N:
        raise UsageError(f"series prefix has {len(arr)} terms, need {N}")
    return arr[:N].copy()


def dilate_series(f: np.ndarray, k: int, N: int) -> np.ndarray:
    """f(x^k) truncated to N terms."""
    out = np.zeros(N, dtype=np.int64)
    idx = np.arange(0, (N + k - 1) // k)
    idx = idx[idx < len(f)]
    out[idx * k] = f[idx]
    return out


def mul_series(a: np.ndarray, b: np.ndarray, N: int, p: int) -> np.ndarray:
    return (np.convolve(a[:N], b[:N])[:N]) % p


def _is_power_of(e: int, p: int) -> bool:
    while e > 1 and e % p == 0:
        e //= p
    return e == 1


def power_series(f: np.ndarray, e: int, N: int, p: int) -> np.ndarray:
    if e == 0:
        out = np.zeros(N, dtype=np.int64)
        out[0] = 1
        return out
    if _is_power_of(e, p):
        return dilate_series(f, e, N) % p
    result, base = None, f[:N] % p
    while e:
        if e & 1:
            result = base.copy() if result is None else mul_series(result, base, N, p)
        e >>= 1
        if e:
            base = mul_series(base, base, N, p)
    return result


def residue(P: Sequence[tuple[LaurentPoly, int]], f, N: int) -> np.ndarray:
    """Coefficients of P(x, f(x)) below x^N (after clearing negative x powers)."""
    if not P:
        raise UsageError("empty polynomial")
    p = P[0][0].p
    shift = -min([c.min_exp for c, _ in P if c] + [0])
    fs = as_series(f, N, p)
    acc = np.zeros(N, dtype=np.int64)
    for coeff, e in P:
        if not coeff:
            continue
        fe = power_series(fs, e, N, p)
        c = np.zeros(N, dtype=np.int64)
        for ex, cv in coeff:
            if ex + shift < N:
                c[ex + shift] = cv
        acc = (acc + mul_series(c, fe, N, p)) % p
    return acc


def verify_annihilator(P: Sequence[tuple[LaurentPoly, int]], f, N: int = 1000) -> bool:
    return not residue(P, f, N).any()


@dataclass(frozen=True)
class OreRelation:
    coeffs: tuple[LaurentPoly, ...]
    precision: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def height(self) -> int:
        return max((c.max_exp for c in self.coeffs if c), default=0)

    def as_polynomial(self, p: int) -> list[tuple[LaurentPoly, int]]:
        return [(c, p**i) for i, c in enumerate(self.coeffs)]

    def __str__(self) -> str:
        p = self.coeffs[0].p
        parts = [f"({c}) f^{p ** i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(parts) + " = 0"


def nullspace_mod_p(A: np.ndarray, p: int) -> list[np.ndarray]:
    """Basis of {v : A v = 0 mod p} by row reduction."""
    M = np.array(A, dtype=np.int64) % p
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            M[[r, k]] = M[[k, r]]
        M[r] = (M[r] * inverse_mod(int(M[r, c]), p)) % p
        col = M[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if len(nzr):
            M[nzr] = (M[nzr] - np.outer(col[nzr], M[r])) % p
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-M[i, fc]) % p
        basis.append(v)
    return basis


def _system(fs: np.ndarray, p: int, D: int, H: int, N: int) -> np.ndarray:
    cols = []
    for i in range(D + 1):
        fi = dilate_series(fs, p**i, N)
        for h in range(H + 1):
            col = np.zeros(N, dtype=np.int64)
            col[h:] = fi[: N - h]
            cols.append(col)
    return np.column_stack(cols)


def _relation(fs, p, D, H, N) -> OreRelation | None:
    basis = nullspace_mod_p(_system(fs, p, D, H, N), p)
    if not basis:
        return None
    # prefer a relation that involves f itself
    with_a0 = [v for v in basis if v[: H + 1].any()]
    if not with_a0:
        return None
    v = with_a0[0]
    coeffs = tuple(
        LaurentPoly.from_dict(p, {h: int(v[i * (H + 1) + h]) for h in range(H + 1)}) for i in range(D + 1)
    )
    return OreRelation(coeffs, N)


def derive_ore_relation(f, p: int, D: int, H: int, N: int = 1000) -> OreRelation | None:
    """Relation with smallest degree D' <= D and, for it, smallest height <= H.

    Returns None when f vanishes to precision N or nothing exists within bounds.
    """
    fs = as_series(f, N, p) % p
    if not fs.any():
        return None
    for d in range(1, D + 1):
        if _relation(fs, p, d, H, N) is None:
            continue
        lo, hi = 0, H
        while lo < hi:
            mid = (lo + hi) // 2
            if _relation(fs, p, d, mid, N) is None:
                lo = mid + 1
            else:
                hi = mid
        rel = _relation(fs, p, d, lo, N)
        if rel is not None and verify_annihilator(rel.as_polynomial(p), fs, N):
            return rel
    return None
