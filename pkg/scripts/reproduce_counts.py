#!/usr/bin/env python3
"""Reproduce the state counts of the running example (x+1 over F_3).

Prints closure sizes, minimized counts for the three domains, the number of
letters of the derived substitution, and a grid cross-check of each automaton.
"""
from __future__ import annotations

import argparse
import time

from lcauto.dfao import combine, iso_check, minimize, reroot
from lcauto.lca import GeneratingPolynomial, generate_grid
from lcauto.presets import running_initial
from lcauto.substitution import dfao_to_subst
from lcauto.synthesis import build_st_automaton, kernel_closure, reflect_state, shear_dfao, to_negp


def mismatches(a, phi, init, window):
    m0, m1, n0, n1 = window
    return int((a.eval_grid(m0, m1, n0, n1) != generate_grid(phi, init, window).values).sum())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--structural", action="store_true", help="also run the closure with structural keys")
    ap.add_argument("--half-width", type=int, default=200)
    args = ap.parse_args(argv)
    phi = GeneratingPolynomial.parse("x+1", 3)
    right, both = running_initial(False), running_initial(True)
    w = args.half_width
    t0 = time.perf_counter()

    clo = kernel_closure(phi, right)
    nn = minimize(clo.dfao)
    print(f"closure states (exact keys): {clo.dfao.n_states}")
    if args.structural:
        print(f"closure states (structural keys): {kernel_closure(phi, right, keys='structural').dfao.n_states}")
    print(f"N x N minimized: {nn.n_states}, mismatches {mismatches(nn, phi, right, (0, w, 0, w))}")
    print(f"letters of the derived substitution: {dfao_to_subst(nn).theta.size}")

    M = to_negp(clo)
    print(f"Z x N [-3,3] minimized: {M.n_states}, mismatches {mismatches(M, phi, right, (-w, w, 0, w))}")
    S = shear_dfao(reroot(M, reflect_state(M)), 1, 0)
    print(f"reflected and sheared: {S.n_states}")
    C = minimize(combine(M, S))
    D, _ = build_st_automaton(phi, both)
    print(f"u_m = u_-m, combined halves: {C.n_states}, direct synthesis: {D.n_states}, "
          f"isomorphic {iso_check(C, D).isomorphic}, mismatches {mismatches(C, phi, both, (-w, w, 0, w))}")
    print(f"total {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
