#!/usr/bin/env python3
"""Render the figure setups to PBM/PGM and print their SHA-256 digests.

    python scripts/reproduce_figures.py --out-dir figures
    python scripts/reproduce_figures.py --write-golden tests/golden/figures.sha256
"""
from __future__ import annotations

import argparse
import hashlib
import time
from pathlib import Path

from lcauto.presets import FIGURES, figure
from lcauto.render import render_text

GOLDEN_FIGURES = ("fig1", "fig2", "fig4", "fig5", "fig6")


def figure_bytes(name: str) -> bytes:
    f = figure(name)
    return render_text(f.grid()).encode("ascii")


def digest(name: str) -> str:
    return hashlib.sha256(figure_bytes(name)).hexdigest()


def extension(name: str) -> str:
    return "pbm" if figure(name).p == 2 else "pgm"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", type=Path)
    ap.add_argument("--write-golden", type=Path)
    ap.add_argument("figures", nargs="*", default=sorted(FIGURES))
    args = ap.parse_args(argv)
    lines = []
    for name in args.figures:
        t0 = time.perf_counter()
        data = figure_bytes(name)
        h = hashlib.sha256(data).hexdigest()
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"{name}.{extension(name)}").write_bytes(data)
        print(f"{name}: {h} ({time.perf_counter() - t0:.1f}s)")
        if name in GOLDEN_FIGURES:
            lines.append(f"{h}  {name}.{extension(name)}")
    if args.write_golden:
        args.write_golden.write_text("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
