#!/usr/bin/env python3
"""Guess and verify an automaton for the full Z x Z Thue-Morse/Ledrappier picture.

The lower half has no exact construction here, so the automaton is inferred
from a brute-force oracle and then checked on every point of a verify window.
"""
from __future__ import annotations

import argparse

from lcauto.dfao import save
from lcauto.empirical import empirical_kernel
from lcauto.presets import figure


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suffix-len", type=int, default=5)
    ap.add_argument("--max-len", type=int, default=12)
    ap.add_argument("--verify-len", type=int, default=12)
    ap.add_argument("--out", help="write the automaton here if it verifies")
    args = ap.parse_args(argv)
    f = figure("fig6")
    res = empirical_kernel(f.grid, f.p, (-f.p, -f.p), args.suffix_len, args.max_len, args.verify_len)
    print("\n".join(res.lines()))
    if args.out and res.verified:
        save(res.dfao, args.out)
    return 0 if res.verified else 2


if __name__ == "__main__":
    raise SystemExit(main())
