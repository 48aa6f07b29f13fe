"""Guess-and-verify automata for 2-D configurations given only a window oracle.

A prefix word w (LSD first) is identified with the function v -> U(w v) on
all suffixes v of length <= L.  Distinct signatures become states, the
closure is built breadth first, and the candidate is then compared with the
oracle on every point whose representation has at most `verify_len` digits.
Nothing is returned as an automaton unless that comparison is clean.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import base_range, check_prime
from .dfao import Dfao, decode_word, minimize
from .errors import BudgetExceeded, UsageError
from .lca import SpacetimeGrid

Oracle = Callable[[tuple[int, int, int, int]], SpacetimeGrid]


@dataclass
class EmpiricalResult:
    dfao: Dfao | None
    verified: bool
    states: int
    mismatches: int
    checked_points: int
    window: tuple[int, int, int, int]
    reason: str = ""
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    def lines(self) -> list[str]:
        return [
            f"verified: {self.verified}",
            f"states: {self.states}",
            f"checked_points: {self.checked_points}",
            f"mismatches: {self.mismatches}",
            "verify_window: " + ",".join(str(v) for v in self.window),
            f"reason: {self.reason or 'ok'}",
            f"seconds: {self.seconds:.3f}",
        ]


def window_for(bases: tuple[int, int], length: int) -> tuple[int, int, int, int]:
    (m0, m1), (n0, n1) = base_range(bases[0], length), base_range(bases[1], length)
    return (m0, m1, n0, n1)


def empirical_kernel(
    oracle: Oracle | SpacetimeGrid,
    p: int,
    bases: tuple[int, int],
    suffix_len: int = 4,
    max_len: int = 10,
    verify_len: int | None = None,
    max_states: int = 5000,
    min_suffix: int = 2,
) -> EmpiricalResult:
    """Guess an automaton from the oracle, then check it on every point of the verify window.

    Prefixes of depth d are compared on all suffixes of length
    min(suffix_len, max_len - d); deeper prefixes therefore carry less
    evidence, and a prefix that would be compared on fewer than `min_suffix`
    digits stops the run with a failure report.
    """
    t0 = time.perf_counter()
    check_prime(p)
    if len(bases) != 2 or any(abs(b) != p for b in bases):
        raise UsageError("bases must be a pair of +-p")
    verify_len = max_len if verify_len is None else verify_len
    if verify_len < max_len:
        raise UsageError("verify_len must be at least max_len")
    if not 1 <= min_suffix <= suffix_len:
        raise UsageError("need 1 <= min_suffix <= suffix_len")
    win = window_for(bases, verify_len)
    grid = oracle if isinstance(oracle, SpacetimeGrid) else oracle(win)
    if grid.m0 > win[0] or grid.m1 < win[1] or grid.n0 > win[2] or grid.n1 < win[3]:
        raise UsageError(f"oracle grid {grid.window} does not cover {win}")
    bx, by = bases
    S = p * p
    words = [w for k in range(suffix_len + 1) for w in itertools.product(range(S), repeat=k)]
    count = [sum(S**t for t in range(k + 1)) for k in range(suffix_len + 1)]
    pv = np.array([decode_word(w, p, bases) for w in words], dtype=np.int64)

    def signature(pt, length, k):
        n = count[k]
        ms = pt[0] + bx**length * pv[:n, 0]
        ns = pt[1] + by**length * pv[:n, 1]
        return grid.at(ms, ns).tobytes()

    # exact[k] holds the signatures of states that were recorded with k suffix digits
    exact: dict[int, dict[bytes, int]] = {k: {} for k in range(suffix_len + 1)}
    reps: list[tuple[tuple[int, int], int, int]] = []

    def evidence(length):
        return min(suffix_len, max_len - length)

    def find_or_add(pt, length):
        k = evidence(length)
        if k < min_suffix:
            return None
        sig = signature(pt, length, k)
        hit = exact[k].get(sig)
        if hit is not None:
            return hit
        # states with more evidence, compared on the shared suffixes
        for q, (qpt, qlen, qk) in enumerate(reps):
            if qk > k and signature(qpt, qlen, k) == sig:
                return q
        for kk in range(min_suffix, k):
            hit = exact[kk].get(sig[: count[kk]])
            if hit is not None:
                return hit
        q = len(reps)
        reps.append((pt, length, k))
        exact[k][sig] = q
        if len(reps) > max_states:
            raise BudgetExceeded(f"empirical kernel exceeded {max_states} states")
        return q

    find_or_add((0, 0), 0)
    rows = []
    head = 0
    while head < len(reps):
        (pm, pn), length, _ = reps[head]
        head += 1
        row = []
        for sym in range(S):
            i, j = divmod(sym, p)
            q = find_or_add((pm + i * bx**length, pn + j * by**length), length + 1)
            if q is None:
                return EmpiricalResult(
                    None, False, len(reps), -1, 0, win,
                    f"state at depth {length + 1} has fewer than {min_suffix} suffix digits inside max_len={max_len}",
                    time.perf_counter() - t0,
                )
            row.append(q)
        rows.append(row)
    outs = [int(grid[pt]) for pt, _, _ in reps]
    cand = Dfao(p, tuple(bases), 0, np.array(outs), np.array(rows))
    m0, m1, n0, n1 = win
    bad = 0
    for a in range(n0, n1 + 1, 256):
        b = min(n1, a + 255)
        vals = cand.eval_grid(m0, m1, a, b)
        bad += int(np.count_nonzero(vals != grid.sub(m0, m1, a, b).values))
    ok = bad == 0
    return EmpiricalResult(
        minimize(cand) if ok else None,
        ok,
        len(reps),
        bad,
        (m1 - m0 + 1) * (n1 - n0 + 1),
        win,
        "" if ok else "candidate disagrees with the oracle",
        time.perf_counter() - t0,
    )
