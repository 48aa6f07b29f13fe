"""Constant-length substitutions, their fixed points and both Cobham conversions."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import check_prime
from .dfao import Dfao, prune, minimize, symbol_digits
from .errors import UsageError


@dataclass(frozen=True)
class Substitution:
    """theta: letter -> word of length p, with coding tau into F_p.

    Letters are 0..A-1; ``names`` only affects parsing and printing.
    For the 2-D variant each image is a p x p block flattened in symbol order,
    i.e. position (i, j) sits at index i * p + j with i the m digit.
    """

    p: int
    images: tuple[tuple[int, ...], ...]
    coding: tuple[int, ...]
    names: tuple[str, ...] = ()
    arity: int = 1

    def __post_init__(self):
        check_prime(self.p)
        A = len(self.images)
        if A == 0:
            raise UsageError("empty alphabet")
        width = self.p**self.arity
        imgs = tuple(tuple(int(c) for c in w) for w in self.images)
        for a, w in enumerate(imgs):
            if len(w) != width:
                raise UsageError(f"image of letter {a} has length {len(w)}, expected {width}")
            if any(not 0 <= c < A for c in w):
                raise UsageError(f"image of letter {a} uses an unknown letter")
        if len(self.coding) != A:
            raise UsageError("coding must assign a value to every letter")
        object.__setattr__(self, "images", imgs)
        object.__setattr__(self, "coding", tuple(int(v) % self.p for v in self.coding))
        if not self.names:
            object.__setattr__(self, "names", tuple(str(a) for a in range(A)))
        elif len(self.names) != A or len(set(self.names)) != A:
            raise UsageError("letter names must be distinct, one per letter")

    @property
    def size(self) -> int:
        return len(self.images)

    def column(self, i: int) -> tuple[int, ...]:
        """The column map theta_i."""
        return tuple(w[i] for w in self.images)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(i) for i in range(self.p**self.arity)]

    def letter(self, name) -> int:
        if isinstance(name, (int, np.integer)) and not isinstance(name, bool):
            if 0 <= name < self.size:
                return int(name)
        if str(name) in self.names:
            return self.names.index(str(name))
        raise UsageError(f"unknown letter {name!r}")

    def apply(self, word: Sequence[int]) -> list[int]:
        out: list[int] = []
        for a in word:
            out.extend(self.images[a])
        return out

    def power_images(self, k: int) -> list[list[int]]:
        """theta^k(a) for every letter a (length p^k, so not a Substitution itself)."""
        if self.arity != 1:
            raise UsageError("powers are only provided for 1-D substitutions")
        imgs = [[a] for a in range(self.size)]
        for _ in range(k):
            imgs = [self.apply(w) for w in imgs]
        return imgs

    def reversed(self) -> "Substitution":
        if self.arity != 1:
            raise UsageError("reversal is only defined for 1-D substitutions")
        return Substitution(self.p, tuple(w[::-1] for w in self.images), self.coding, self.names)

    def seed_period(self, a: int) -> int:
        """Smallest k >= 1 with theta_0^k(a) = a, or 0 if a is not periodic."""
        col = self.column(0)
        b = col[a]
        for k in range(1, self.size + 1):
            if b == a:
                return k
            b = col[b]
        return 0


def substitution(images: dict | Sequence, coding=None, p: int | None = None) -> Substitution:
    """Build a 1-D substitution from a dict such as {"a": "ab", "b": "cd"}."""
    if isinstance(images, dict):
        names = tuple(str(k) for k in images)
        words = [_split_word(str(w), names) if isinstance(w, str) else list(w) for w in images.values()]
        idx = [[names.index(str(c)) for c in w] for w in words]
    else:
        names = ()
        idx = [list(w) for w in images]
    length = len(idx[0])
    p = length if p is None else p
    if coding is None:
        coding = list(range(len(idx)))
    elif isinstance(coding, dict):
        coding = [coding[n] for n in (names or range(len(idx)))]
    return Substitution(p, tuple(tuple(w) for w in idx), tuple(coding), names)


def _split_word(w: str, names: Sequence[str]) -> list[str]:
    if " " in w.strip():
        return w.split()
    if all(len(n) == 1 for n in names):
        return list(w)
    raise UsageError(f"multi-character letter names need space-separated words: {w!r}")


def fixed_point_prefix(theta: Substitution, a, N: int) -> list[int]:
    """First N letters of the fixed point of theta^k grown from a.

    k is the period of a under the first column map, so k = 1 for the usual
    prolongable seed.
    """
    a = theta.letter(a)
    if theta.arity != 1:
        raise UsageError("use fixed_point_block for 2-D substitutions")
    k = theta.seed_period(a)
    if k == 0:
        raise UsageError(f"seed letter {theta.names[a]!r} is not prolongable: theta_0 never returns to it")
    word = [a]
    while len(word) < N:
        for _ in range(k):
            word = theta.apply(word)
    return word[:N]


def fixed_point_block(theta: Substitution, a, levels: int) -> np.ndarray:
    """Letters of the 2-D fixed point on [0, p^levels)^2, indexed [m, n]."""
    if theta.arity != 2:
        raise UsageError("fixed_point_block needs a 2-D substitution")
    p = theta.p
    a = theta.letter(a)
    if theta.images[a][0] != a:
        raise UsageError("seed block does not start with the seed letter")
    imgs = np.array(theta.images, dtype=np.int64).reshape(theta.size, p, p)
    block = np.array([[a]], dtype=np.int64)
    for _ in range(levels):
        big = imgs[block]  # shape (s, s, p, p)
        s = block.shape[0]
        block = big.transpose(0, 2, 1, 3).reshape(s * p, s * p)
    return block


def coded_prefix(theta: Substitution, a, N: int) -> np.ndarray:
    word = fixed_point_prefix(theta, a, N)
    return np.array(theta.coding, dtype=np.int64)[word]


def subst_to_dfao(theta: Substitution, a, minimal: bool = True) -> Dfao:
    """Automaton reading m LSD-first whose output is tau of the fixed point at m.

    States are maps h of the alphabet; digit j sends h to h o theta_j.  When the
    seed only returns to itself after k steps of theta_0, the state also keeps
    the input length mod k so the missing high zero digits can be supplied.
    """
    a = theta.letter(a)
    k = theta.seed_period(a)
    if k == 0:
        raise UsageError(f"seed letter {theta.names[a]!r} is not prolongable")
    cols = theta.columns()
    col0 = cols[0]
    ident = tuple(range(theta.size))
    start = (ident, 0)
    index = {start: 0}
    states = [start]
    rows = []
    head = 0
    while head < len(states):
        h, r = states[head]
        head += 1
        row = []
        for c in cols:
            nxt = (tuple(h[c[b]] for b in range(theta.size)), (r + 1) % k)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    outs = []
    for h, r in states:
        b = a
        for _ in range((-r) % k):
            b = col0[b]
        outs.append(theta.coding[h[b]])
    d = Dfao(theta.p, (theta.p,) * theta.arity, 0, np.array(outs), np.array(rows))
    return minimize(d) if minimal else d


@dataclass(frozen=True)
class SubstitutionFromDfao:
    theta: Substitution
    seed: int
    letters: tuple[tuple[int, ...], ...] = field(repr=False, default=())


def dfao_to_subst(a: Dfao) -> SubstitutionFromDfao:
    """Cobham in reverse: letters are maps v: Q -> F_p reached from the output map.

    Reading a digit d appends it below the digits read so far, sending v to
    v o delta_d; the coding evaluates v at the initial state.
    """
    if any(b < 0 for b in a.bases):
        raise UsageError("negative-base axes are not supported; convert to base p first")
    a = prune(a)
    start = tuple(int(v) for v in a.outputs)
    index = {start: 0}
    letters = [start]
    images = []
    head = 0
    while head < len(letters):
        v = np.array(letters[head])
        head += 1
        img = []
        for sym in range(a.n_symbols):
            w = tuple(int(x) for x in v[a.trans[:, sym]])
            if w not in index:
                index[w] = len(letters)
                letters.append(w)
            img.append(index[w])
        images.append(tuple(img))
    if images[0][0] != 0:
        raise UsageError("output map is not fixed by the zero digit; automaton is not zero-padding stable")
    coding = tuple(v[a.initial] for v in letters)
    theta = Substitution(a.p, tuple(images), coding, arity=a.arity)
    return SubstitutionFromDfao(theta, 0, tuple(letters))


def is_bijective(theta: Substitution) -> bool:
    return all(len(set(c)) == theta.size for c in theta.columns())


def incidence_matrix(theta: Substitution) -> np.ndarray:
    """Entry (a, b) counts occurrences of a in theta(b)."""
    M = np.zeros((theta.size, theta.size), dtype=np.int64)
    for b, w in enumerate(theta.images):
        for a in w:
            M[a, b] += 1
    return M


def is_primitive(theta: Substitution) -> bool:
    A = theta.size
    M = (incidence_matrix(theta) > 0).astype(np.int64)
    P = M.copy()
    for _ in range(2 * A * A):
        if (P > 0).all():
            return True
        P = ((P @ M) > 0).astype(np.int64)
    return bool((P > 0).all())


@dataclass(frozen=True)
class CoincidenceWitness:
    depth: int
    column: int
    letter: int
    path: tuple[int, ...]


def has_coincidence(theta: Substitution, max_depth: int = 64) -> CoincidenceWitness | None:
    """Shallowest column of some theta^k collapsing the alphabet to one letter.

    BFS over image sets; the path lists column digits most significant first,
    so the column of theta^k is the path read in base p.
    """
    if max_depth < 1:
        raise UsageError("max_depth must be at least 1")
    cols = theta.columns()
    full = frozenset(range(theta.size))
    seen = {full}
    queue = deque([(full, ())])
    while queue:
        S, path = queue.popleft()
        if len(path) >= max_depth:
            continue
        for j, c in enumerate(cols):
            T = frozenset(c[s] for s in S)
            nxt = path + (j,)
            if len(T) == 1:
                col = 0
                for d in nxt:
                    col = col * len(cols) + d
                return CoincidenceWitness(len(nxt), col, next(iter(T)), nxt)
            if T not in seen:
                seen.add(T)
                queue.append((T, nxt))
    return None


def parity_substitution(p: int) -> Substitution:
    check_prime(p)
    return Substitution(p, tuple(tuple((a + i) % p for i in range(p)) for a in range(p)), tuple(range(p)))


# text formats


def format_substitution(theta: Substitution, seed=None) -> str:
    if theta.arity != 1:
        raise UsageError("only 1-D substitutions have a text format")
    sep = "" if all(len(n) == 1 for n in theta.names) else " "
    lines = [f"p {theta.p}", "alphabet " + " ".join(theta.names)]
    for a, w in enumerate(theta.images):
        lines.append(f"{theta.names[a]} -> " + sep.join(theta.names[c] for c in w))
    lines.append("coding: " + " ".join(f"{n}={v}" for n, v in zip(theta.names, theta.coding)))
    if seed is not None:
        lines.append(f"seed {theta.names[theta.letter(seed)]}")
    return "\n".join(lines) + "\n"


def parse_substitution(text: str) -> tuple[Substitution, int | None]:
    p = None
    names: list[str] = []
    rules: dict[str, str] = {}
    coding: dict[str, int] = {}
    seed = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            lhs, rhs = (s.strip() for s in line.split("->", 1))
            rules[lhs] = rhs
        elif line.startswith("coding"):
            for tok in line.split(":", 1)[1].split():
                n, _, v = tok.partition("=")
                coding[n] = int(v)
        elif line.startswith("alphabet"):
            names = line.split()[1:]
        elif line.startswith("p "):
            p = int(line.split()[1])
        elif line.startswith("seed"):
            seed = line.split()[1]
        else:
            raise UsageError(f"unrecognised substitution line: {raw!r}")
    if p is None or not rules:
        raise UsageError("substitution needs a 'p' line and at least one rule")
    names = names or list(rules)
    if set(names) != set(rules):
        raise UsageError("every letter needs exactly one rule")
    missing = [n for n in names if n not in coding]
    if coding and missing:
        raise UsageError(f"coding missing for {missing}")
    words = {n: _split_word(rules[n], names) for n in names}
    for n, w in words.items():
        unknown = sorted(set(w) - set(names))
        if unknown:
            raise UsageError(f"rule for {n!r} uses unknown letters {unknown}")
    images = tuple(tuple(names.index(c) for c in words[n]) for n in names)
    cod = tuple(coding[n] for n in names) if coding else tuple(int(n) for n in names)
    theta = Substitution(p, images, cod, tuple(names))
    return theta, (None if seed is None else theta.letter(seed))


# bi-infinite initial conditions

ALIGNMENTS = ("mirror", "shift")


@dataclass(frozen=True)
class InitialCondition:
    """u on Z from two one-sided automata.

    u_m = right(m) for m >= 0.  For m <= -1 the left automaton is read at
    -m ("mirror", which also needs left(0) = right(0)) or at -m-1 ("shift").
    A missing left automaton means a zero left half.
    """

    right: Dfao
    left: Dfao | None = None
    alignment: str = "mirror"
    label: str = ""

    def __post_init__(self):
        if self.alignment not in ALIGNMENTS:
            raise UsageError(f"alignment must be one of {ALIGNMENTS}")
        for d in (self.right, self.left):
            if d is not None and (d.arity != 1 or d.bases[0] < 0):
                raise UsageError("initial-condition halves must be 1-D base-p automata")
        if self.left is not None:
            if self.left.p != self.right.p:
                raise UsageError("halves use different primes")
            if self.alignment == "mirror" and self.left.eval(0) != self.right.eval(0):
                raise UsageError("mirror alignment needs both halves to agree at 0")

    @property
    def p(self) -> int:
        return self.right.p

    def values(self, m0: int, m1: int) -> np.ndarray:
        ms = np.arange(m0, m1 + 1, dtype=np.int64)
        out = np.zeros(len(ms), dtype=np.int64)
        pos = ms >= 0
        if pos.any():
            out[pos] = self.right.eval_many(ms[pos][:, None])
        if self.left is not None and (~pos).any():
            idx = -ms[~pos] - (1 if self.alignment == "shift" else 0)
            out[~pos] = self.left.eval_many(idx[:, None])
        return out

    def __call__(self, m: int) -> int:
        return int(self.values(m, m)[0])


def initial_from_substitutions(
    right: tuple[Substitution, object],
    left: tuple[Substitution, object] | None = None,
    alignment: str = "mirror",
    label: str = "",
) -> InitialCondition:
    r = subst_to_dfao(*right)
    l = subst_to_dfao(*left) if left is not None else None
    return InitialCondition(r, l, alignment, label)


def parse_initial(text: str) -> InitialCondition:
    """Sections [right] and [left] each hold a substitution block; 'alignment' may appear anywhere."""
    sections: dict[str, list[str]] = {"": []}
    cur = ""
    alignment = "mirror"
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1].strip().lower()
            sections[cur] = []
        elif line.startswith("alignment"):
            alignment = line.split()[-1]
        else:
            sections.setdefault(cur, []).append(raw)
    if "right" not in sections:
        # a bare substitution block describes the right half only
        sections["right"] = sections[""]
    theta, seed = parse_substitution("\n".join(sections["right"]))
    right = subst_to_dfao(theta, 0 if seed is None else seed)
    left = None
    body = "\n".join(sections.get("left", [])).strip()
    if body and body != "zero":
        lt, ls = parse_substitution(body)
        left = subst_to_dfao(lt, 0 if ls is None else ls)
    return InitialCondition(right, left, alignment)
