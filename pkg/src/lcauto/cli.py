"""Command-line front end.

Every subcommand prints a line-oriented ``key: value`` report (also written to
``--report`` when given) that ends with a reproducibility block.  Exit status
is 0 on success, 1 on usage or domain errors and 2 when a budget runs out or a
bounded decision is inconclusive.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from sympy import isprime

from . import __version__
from .algebra import parse_poly
from .analysis import (
    Inconclusive,
    certify_power_free,
    complexity,
    decide_power_fixed,
    letter_frequencies,
)
from .dfao import Dfao, combine, load, minimize, save
from .errors import BudgetExceeded, DomainError, UsageError
from .lca import GeneratingPolynomial, generate_grid, read_grid, write_grid
from .ore import derive_ore_relation, residue
from .render import render
from .substitution import (
    dfao_to_subst,
    format_substitution,
    has_coincidence,
    parse_initial,
    parse_substitution,
    subst_to_dfao,
)
from .synthesis import build_st_automaton, shear_dfao, to_negp

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    p: int | None = None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    window: tuple[int, int, int, int] | None = None
    options: dict = field(default_factory=dict)
    out_dir: str = "."
    budget_states: int = 200_000
    verify_window: int | None = None

    def validate(self) -> "RunConfig":
        if self.p is not None and not isprime(self.p):
            raise UsageError("--p must be a prime >= 2")
        if self.budget_states < 1:
            raise UsageError("--budget-states must be positive")
        if self.window is not None:
            m0, m1, n0, n1 = self.window
            if m0 > m1 or n0 > n1:
                raise UsageError(f"empty window {self.window}")
        for name, path in self.inputs.items():
            if path is not None and not Path(path).is_file():
                raise UsageError(f"{name}: no such file {path}")
        return self

    def output(self, name: str) -> Path | None:
        path = self.outputs.get(name)
        if path is None:
            return None
        path = Path(path)
        return path if path.is_absolute() else Path(self.out_dir) / path

    def echo(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _window(text: str) -> tuple[int, int, int, int]:
    try:
        parts = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad window {text!r}") from None
    if len(parts) != 4:
        raise UsageError("window needs four integers m0,m1,n0,n1")
    return parts


def _point(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lcauto", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lcauto {__version__}")
    g = ap.add_argument_group("global")
    g.add_argument("--p", type=int, help="the prime")
    g.add_argument("--seed-spec", help="initial-condition spec file used when --init is absent")
    g.add_argument("--out-dir", default=".", help="directory for relative output paths")
    g.add_argument("--budget-states", type=int, default=200_000)
    g.add_argument("--verify-window", type=int, help="half-width of the cross-check window")
    sub = ap.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("evolve", help="brute-force spacetime grid")
    s.add_argument("--phi", required=True)
    s.add_argument("--init")
    s.add_argument("--window", required=True, type=_window)
    s.add_argument("--out", required=True, help="grid.bin, or .pbm/.pgm for an image")

    s = sub.add_parser("synth", help="exact automaton for a spacetime diagram")
    s.add_argument("--phi", required=True)
    s.add_argument("--init")
    s.add_argument("--axes", default="negp,p", choices=["negp,p", "p,p"])
    s.add_argument("--out", required=True)
    s.add_argument("--report")

    s = sub.add_parser("shear", help="V_{m,n} = U_{m-s-rn,n}")
    s.add_argument("--dfao", required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--s", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("to-negp", help="first axis from base p to base -p (zero for m < 0)")
    s.add_argument("--dfao", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("combine", help="termwise combination of two automata")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--op", default="add", choices=["add", "sub", "mul"])
    s.add_argument("--out", required=True)
    s.add_argument("--no-minimize", action="store_true")

    s = sub.add_parser("minimize")
    s.add_argument("--dfao", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("eval")
    s.add_argument("--dfao", required=True)
    s.add_argument("--point", action="append", required=True, type=_point)

    s = sub.add_parser("subst2dfao")
    s.add_argument("--subst", required=True)
    s.add_argument("--seed")
    s.add_argument("--out", required=True)

    s = sub.add_parser("dfao2subst")
    s.add_argument("--dfao", required=True)
    s.add_argument("--out")

    s = sub.add_parser("coincidence")
    s.add_argument("--subst", required=True)
    s.add_argument("--max-depth", type=int, default=16)

    s = sub.add_parser("certify", help="check the power-freeness theorems' hypotheses")
    s.add_argument("--subst", required=True)
    s.add_argument("--phi", required=True)
    s.add_argument("--seed")

    s = sub.add_parser("powerfree", help="bounded-period decision for horizontal powers")
    s.add_argument("--dfao", required=True)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--lmax", type=int, required=True)

    s = sub.add_parser("freqs")
    s.add_argument("--subst", required=True)

    s = sub.add_parser("complexity")
    s.add_argument("--grid", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("ore", help="search a relation sum A_i(x) f^(p^i) = 0 for the right half of --init")
    s.add_argument("--init")
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--precision", type=int, default=1000)

    s = sub.add_parser("verify-annihilator", help="check P(x, f) = 0 to precision N")
    s.add_argument("--init")
    s.add_argument("--poly", required=True, help="file with lines 'y^e: <poly in x>'")
    s.add_argument("--precision", type=int, default=1000)

    s = sub.add_parser("render")
    s.add_argument("--grid", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["pbm", "pgm"])
    return ap


_INPUT_KEYS = ("init", "dfao", "a", "b", "subst", "grid", "poly")
_OUTPUT_KEYS = ("out", "report")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.cmd is None:
        raise UsageError("no subcommand given")
    d = vars(ns)
    inputs = {k: d[k] for k in _INPUT_KEYS if k in d}
    if "init" in inputs and inputs["init"] is None:
        inputs["init"] = ns.seed_spec
        if ns.seed_spec is None:
            raise UsageError("--init (or the global --seed-spec) is required")
    outputs = {k: d[k] for k in _OUTPUT_KEYS if d.get(k) is not None}
    skip = set(_INPUT_KEYS) | set(_OUTPUT_KEYS) | {"cmd", "p", "seed_spec", "out_dir", "budget_states",
                                                    "verify_window", "window"}
    options = {k: v for k, v in d.items() if k not in skip}
    return RunConfig(ns.cmd, ns.p, inputs, outputs, d.get("window"), options, ns.out_dir,
                     ns.budget_states, ns.verify_window).validate()


def _need_p(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise UsageError(f"{cfg.subcommand} needs --p")
    return cfg.p


def _phi(cfg: RunConfig) -> GeneratingPolynomial:
    return GeneratingPolynomial(parse_poly(cfg.options["phi"], _need_p(cfg)))


def _init(cfg: RunConfig):
    ic = parse_initial(Path(cfg.inputs["init"]).read_text())
    if cfg.p is not None and ic.p != cfg.p:
        raise DomainError(f"initial condition is over F_{ic.p}, not F_{cfg.p}")
    return ic


def _subst(cfg: RunConfig):
    theta, seed = parse_substitution(Path(cfg.inputs["subst"]).read_text())
    if cfg.options.get("seed") is not None:
        seed = theta.letter(cfg.options["seed"])
    return theta, (0 if seed is None else seed)


def _save_dfao(cfg: RunConfig, a: Dfao, report: list[str]) -> None:
    path = cfg.output("out")
    path.parent.mkdir(parents=True, exist_ok=True)
    save(a, path)
    report += [f"states: {a.n_states}", f"axis_bases: {','.join(map(str, a.bases))}", f"out: {path}"]


def _cross_check(cfg: RunConfig, a: Dfao, phi, ic, report: list[str]) -> None:
    if cfg.verify_window is None:
        return
    w = cfg.verify_window
    m0 = -w if a.bases[0] < 0 else 0
    grid = generate_grid(phi, ic, (m0, w, 0, w))
    bad = int(np.count_nonzero(a.eval_grid(m0, w, 0, w) != grid.values))
    report += [f"verify_window: {m0},{w},0,{w}", f"verify_mismatches: {bad}"]
    if bad:
        raise DomainError(f"synthesized automaton disagrees with the grid on {bad} cells")


def _series_prefix(cfg: RunConfig, N: int) -> np.ndarray:
    ic = _init(cfg)
    return ic.right.eval_many(np.arange(N, dtype=np.int64)[:, None])


def _read_y_poly(path, p: int):
    out = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, _, rhs = line.partition(":")
        lhs = lhs.strip()
        if not rhs or not lhs.startswith("y"):
            raise UsageError(f"bad polynomial line {raw!r}; expected 'y^e: <poly>'")
        e = int(lhs[2:]) if lhs.startswith("y^") else 1
        out.append((parse_poly(rhs, p), e))
    if not out:
        raise UsageError("empty polynomial file")
    return out


def run(cfg: RunConfig) -> tuple[int, list[str]]:
    """Dispatch one subcommand; returns the exit status and the report lines."""
    report: list[str] = [f"command: {cfg.subcommand}"]
    status = EXIT_OK
    t0 = time.perf_counter()
    c, o = cfg.subcommand, cfg.options
    if c == "evolve":
        phi = _phi(cfg)
        grid = generate_grid(phi, _init(cfg), cfg.window, provenance=str(phi))
        path = cfg.output("out")
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() in (".pbm", ".pgm"):
            render(grid, path)
        else:
            write_grid(grid, path)
        report += [f"window: {','.join(map(str, grid.window))}", f"out: {path}"]
    elif c == "synth":
        phi, ic = _phi(cfg), _init(cfg)
        a, rep = build_st_automaton(phi, ic, axes=o["axes"], budget=cfg.budget_states)
        report += rep.lines()
        _save_dfao(cfg, a, report)
        _cross_check(cfg, a, phi, ic, report)
    elif c == "shear":
        _save_dfao(cfg, shear_dfao(load(cfg.inputs["dfao"]), o["r"], o["s"]), report)
    elif c == "to-negp":
        _save_dfao(cfg, to_negp(load(cfg.inputs["dfao"])), report)
    elif c == "combine":
        out = combine(load(cfg.inputs["a"]), load(cfg.inputs["b"]), o["op"], budget=cfg.budget_states)
        _save_dfao(cfg, out if o["no_minimize"] else minimize(out), report)
    elif c == "minimize":
        _save_dfao(cfg, minimize(load(cfg.inputs["dfao"])), report)
    elif c == "eval":
        a = load(cfg.inputs["dfao"])
        for pt in o["point"]:
            report.append(f"value {','.join(map(str, pt))}: {a.eval(pt)}")
    elif c == "subst2dfao":
        theta, seed = _subst(cfg)
        _save_dfao(cfg, subst_to_dfao(theta, seed), report)
    elif c == "dfao2subst":
        res = dfao_to_subst(load(cfg.inputs["dfao"]))
        report += [f"letters: {res.theta.size}", f"arity: {res.theta.arity}"]
        if cfg.output("out") is not None:
            cfg.output("out").write_text(format_substitution(res.theta, res.seed))
            report.append(f"out: {cfg.output('out')}")
    elif c == "coincidence":
        theta, _ = _subst(cfg)
        w = has_coincidence(theta, o["max_depth"])
        if w is None:
            report += ["coincidence: none", f"max_depth: {o['max_depth']}"]
        else:
            report += ["coincidence: yes", f"depth: {w.depth}", f"column: {w.column + 1} (1-based)",
                       f"letter: {theta.names[w.letter]}", f"path: {' '.join(map(str, w.path))}"]
    elif c == "certify":
        theta, seed = _subst(cfg)
        phi = GeneratingPolynomial(parse_poly(o["phi"], theta.p))
        cert = certify_power_free(theta, seed, phi)
        report += cert.lines()
        if not cert.issued:
            status = EXIT_ERROR
    elif c == "powerfree":
        a = load(cfg.inputs["dfao"])
        try:
            w = decide_power_fixed(a, o["M"], o["lmax"], budget=cfg.budget_states)
        except Inconclusive as e:
            report += ["verdict: inconclusive", f"reason: {e}"]
            status = EXIT_BUDGET
        else:
            if w is None:
                report.append("verdict: none")
            else:
                report += ["verdict: power", f"m: {w.m}", f"n: {w.n}", f"period: {w.period}"]
            report += [f"M: {o['M']}", f"max_period: {o['lmax']}"]
    elif c == "freqs":
        theta, _ = _subst(cfg)
        for name, f in zip(theta.names, letter_frequencies(theta)):
            report.append(f"freq {name}: {f}")
    elif c == "complexity":
        grid = read_grid(cfg.inputs["grid"])
        report += [f"complexity: {complexity(grid, o['m'], o['n'])}",
                   "scope: exact for the window, lower bound for the configuration",
                   f"window: {','.join(map(str, grid.window))}"]
    elif c == "ore":
        p = _need_p(cfg)
        rel = derive_ore_relation(_series_prefix(cfg, o["precision"]), p, o["degree"], o["height"], o["precision"])
        if rel is None:
            report.append("relation: none")
        else:
            report += [f"relation: {rel}", f"degree: {rel.degree}", f"height: {rel.height}"]
        report.append(f"precision: {o['precision']}")
    elif c == "verify-annihilator":
        p = _need_p(cfg)
        P = _read_y_poly(cfg.inputs["poly"], p)
        res = residue(P, _series_prefix(cfg, o["precision"]), o["precision"])
        nz = np.nonzero(res)[0]
        report += [f"annihilates: {not len(nz)}", f"precision: {o['precision']}"]
        if len(nz):
            report.append(f"first_nonzero_residue: x^{int(nz[0])}")
            status = EXIT_ERROR
    elif c == "render":
        grid = read_grid(cfg.inputs["grid"])
        path = cfg.output("out")
        path.parent.mkdir(parents=True, exist_ok=True)
        render(grid, path, o["format"])
        report.append(f"out: {path}")
    else:
        raise UsageError(f"unknown subcommand {c!r}")
    report += [
        f"elapsed_seconds: {time.perf_counter() - t0:.3f}",
        f"tool_version: lcauto {__version__}",
        f"config: {cfg.echo()}",
    ]
    if cfg.output("report") is not None:
        # timings vary between runs; the file copy stays byte-stable
        stable = [line for line in report if "seconds" not in line.split(":", 1)[0]]
        cfg.output("report").write_text("\n".join(stable) + "\n")
    return status, report


_VALUE_FLAGS = ("--window", "--point", "--r", "--s", "--phi")


def _glue_negative(argv: list[str]) -> list[str]:
    """Let `--window -5,5,0,9` through: argparse reads '-5,...' as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(build_parser().parse_args(_glue_negative(argv)))
        status, report = run(cfg)
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        print("verdict: inconclusive")
        return EXIT_BUDGET
    except (UsageError, DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print("\n".join(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
