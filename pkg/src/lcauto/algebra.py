"""Scalars in F_p, sparse Laurent polynomials, Cartier operators and base +-p numeration.

All digit lists are least significant digit first.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from math import isqrt
from typing import Iterable, Mapping

from .errors import UsageError

MAX_PRIME = 97


def check_prime(p: int) -> int:
    if not isinstance(p, int) or p < 2 or p > MAX_PRIME:
        raise UsageError(f"p must be a prime in [2, {MAX_PRIME}], got {p!r}")
    if any(p % d == 0 for d in range(2, isqrt(p) + 1)):
        raise UsageError(f"{p} is not prime")
    return p


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class LaurentPoly:
    """Finitely supported map exponent -> nonzero element of F_p.

    ``terms`` is sorted by exponent and never stores a zero coefficient.
    """

    p: int
    terms: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, p: int, coeffs: Mapping[int, int]) -> "LaurentPoly":
        items = sorted((e, c % p) for e, c in coeffs.items())
        return cls(p, tuple((e, c) for e, c in items if c))

    @classmethod
    def monomial(cls, p: int, exp: int = 0, coeff: int = 1) -> "LaurentPoly":
        return cls.from_dict(p, {exp: coeff})

    @classmethod
    def zero(cls, p: int) -> "LaurentPoly":
        return cls(p, ())

    @classmethod
    def one(cls, p: int) -> "LaurentPoly":
        return cls.monomial(p, 0, 1)

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def coeff(self, exp: int) -> int:
        for e, c in self.terms:
            if e == exp:
                return c
        return 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.terms)

    @property
    def max_exp(self) -> int:
        if not self.terms:
            raise UsageError("zero polynomial has no exponents")
        return self.terms[-1][0]

    @property
    def min_exp(self) -> int:
        if not self.terms:
            raise UsageError("zero polynomial has no exponents")
        return self.terms[0][0]

    def _check(self, other: "LaurentPoly") -> None:
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"expected LaurentPoly, got {type(other).__name__}")
        if other.p != self.p:
            raise UsageError(f"mismatched primes {self.p} and {other.p}")

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0) + c
        return LaurentPoly.from_dict(self.p, acc)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.p, tuple((e, (-c) % self.p) for e, c in self.terms))

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def scale(self, k: int) -> "LaurentPoly":
        return LaurentPoly.from_dict(self.p, {e: c * k for e, c in self.terms})

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by x^k."""
        return LaurentPoly(self.p, tuple((e + k, c) for e, c in self.terms))

    def dilate(self, k: int) -> "LaurentPoly":
        """Substitute x -> x^k (k >= 1)."""
        if k < 1:
            raise UsageError("dilation factor must be positive")
        return LaurentPoly(self.p, tuple((e * k, c) for e, c in self.terms))

    def reflect(self) -> "LaurentPoly":
        """Substitute x -> x^-1."""
        return LaurentPoly.from_dict(self.p, {-e: c for e, c in self.terms})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return laurent_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        return frobenius_power(self, n)

    def evaluate_at_one(self) -> int:
        return sum(c for _, c in self.terms) % self.p

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"LaurentPoly(p={self.p}, {format_poly(self)!r})"


def laurent_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check(b)
    acc: dict[int, int] = {}
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            acc[ea + eb] = acc.get(ea + eb, 0) + ca * cb
    return LaurentPoly.from_dict(a.p, acc)


def frobenius_power(phi: LaurentPoly, n: int) -> LaurentPoly:
    """phi**n using phi^(p^k) = phi(x^(p^k)) on each base-p digit of n."""
    if n < 0:
        raise UsageError("exponent must be nonnegative")
    p = phi.p
    result = LaurentPoly.one(p)
    k = 0
    while n:
        d = n % p
        if d:
            block = phi.dilate(p**k)
            for _ in range(d):
                result = laurent_mul(result, block)
        n //= p
        k += 1
    return result


def cartier_poly(f: LaurentPoly, i: int) -> LaurentPoly:
    """Keep exponents congruent to i mod p and divide them by p."""
    p = f.p
    if not 0 <= i < p:
        raise UsageError(f"digit {i} out of range for p={p}")
    return LaurentPoly(p, tuple(((e - i) // p, c) for e, c in f.terms if (e - i) % p == 0))


_TERM = re.compile(
    r"""^(?P<coef>\d+)?\s*\*?\s*(?:(?P<x>x)(?:\s*\^\s*(?P<exp>[+-]?\s*\d+))?)?$""",
    re.VERBOSE,
)


def parse_poly(text: str, p: int) -> LaurentPoly:
    """Parse expressions such as ``x^-1 + x^-3 + x^-7`` or ``2x^2 - x + 1``."""
    check_prime(p)
    s = text.replace(" ", "")
    if not s:
        raise UsageError("empty polynomial expression")
    # split into signed chunks, keeping the sign inside exponents intact
    chunks: list[tuple[int, str]] = []
    sign, buf, i = 1, "", 0
    while i < len(s):
        ch = s[i]
        if ch in "+-" and buf and not buf.endswith("^"):
            chunks.append((sign, buf))
            sign, buf = (1 if ch == "+" else -1), ""
        elif ch in "+-" and not buf:
            sign = sign * (1 if ch == "+" else -1)
        else:
            buf += ch
        i += 1
    if not buf:
        raise UsageError(f"dangling operator in {text!r}")
    chunks.append((sign, buf))
    acc: dict[int, int] = {}
    for sgn, chunk in chunks:
        m = _TERM.match(chunk)
        if not m or (m.group("coef") is None and m.group("x") is None):
            raise UsageError(f"cannot parse term {chunk!r} in {text!r}")
        coef = int(m.group("coef")) if m.group("coef") else 1
        if m.group("x"):
            exp = int(m.group("exp").replace(" ", "")) if m.group("exp") else 1
        else:
            exp = 0
        acc[exp] = acc.get(exp, 0) + sgn * coef
    return LaurentPoly.from_dict(p, acc)


def format_poly(f: LaurentPoly) -> str:
    if not f.terms:
        return "0"
    parts = []
    for e, c in sorted(f.terms, key=lambda t: -t[0]):
        if e == 0:
            parts.append(str(c))
            continue
        mono = "x" if e == 1 else f"x^{e}"
        parts.append(mono if c == 1 else f"{c}{mono}")
    return " + ".join(parts)


@dataclass(frozen=True)
class DigitString:
    base: int
    digits: tuple[int, ...]

    def __str__(self) -> str:
        """Most significant digit first, as usually printed."""
        return "".join(str(d) for d in reversed(self.digits)) if self.digits else ""

    def __len__(self) -> int:
        return len(self.digits)


def encode_base(m: int, base: int) -> DigitString:
    """Canonical representation of m in base +-p with digits 0..p-1."""
    p = abs(base)
    check_prime(p)
    if base > 0 and m < 0:
        raise UsageError(f"negative integer {m} has no base-{base} representation")
    digits = []
    while m != 0:
        d = m % p
        digits.append(d)
        m = (m - d) // base
    return DigitString(base, tuple(digits))


def decode_base(d: DigitString | Iterable[int], base: int | None = None) -> int:
    if isinstance(d, DigitString):
        base, digits = d.base, d.digits
    else:
        digits = tuple(d)
        if base is None:
            raise UsageError("base required for a bare digit list")
    value = 0
    for k in reversed(digits):
        value = value * base + k
    return value


def pair_encode(point: Iterable[int], bases: Iterable[int]) -> list[tuple[int, ...]]:
    """Zip per-axis digit strings, padding the shorter ones with high zeros."""
    strings = [encode_base(c, b).digits for c, b in zip(point, bases)]
    width = max((len(s) for s in strings), default=0)
    padded = [s + (0,) * (width - len(s)) for s in strings]
    return list(zip(*padded))


def base_range(base: int, length: int) -> tuple[int, int]:
    """Smallest and largest integers whose representation has at most `length` digits."""
    p = abs(base)
    lo = hi = 0
    for k in range(length):
        w = base**k
        if w > 0:
            hi += (p - 1) * w
        else:
            lo += (p - 1) * w
    return lo, hi
