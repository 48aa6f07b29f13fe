"""Laurent polynomials over F_p, Cartier operators and +-p numeration."""
from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcauto.algebra import (
    DigitString,
    LaurentPoly,
    base_range,
    cartier_poly,
    check_prime,
    decode_base,
    encode_base,
    format_poly,
    frobenius_power,
    laurent_mul,
    pair_encode,
    parse_poly,
)
from lcauto.errors import UsageError

PRIMES = [2, 3, 5]


def polys(p, lo=-20, hi=20, size=8):
    return st.dictionaries(st.integers(lo, hi), st.integers(0, p - 1), max_size=size).map(
        lambda d: LaurentPoly.from_dict(p, d)
    )


def P(text, p):
    return parse_poly(text, p)


@pytest.mark.parametrize(
    ("a", "b", "p", "expected"),
    [
        ("1 + x^-1", "1 + x^-1", 2, "1 + x^-2"),
        ("x + 1", "x + 1", 3, "x^2 + 2x + 1"),
        ("x^-1 + x^-3 + x^-7", "x^-1 + x^-3 + x^-7", 2, "x^-2 + x^-6 + x^-14"),
        ("0", "x + 1", 3, "0"),
    ],
)
def test_mul(a, b, p, expected):
    assert laurent_mul(P(a, p), P(b, p)) == P(expected, p)


@pytest.mark.parametrize("k", range(5))
def test_freshmans_dream_p3(k):
    phi = P("x + 1", 3)
    assert frobenius_power(phi, 3**k) == LaurentPoly.from_dict(3, {3**k: 1, 0: 1})
    four = frobenius_power(phi, 4 * 3**k)
    assert four == LaurentPoly.from_dict(3, {4 * 3**k: 1, 3 * 3**k: 1, 3**k: 1, 0: 1})


def test_power_zero_is_one():
    assert frobenius_power(P("x^-1 + x^-3", 2), 0) == LaurentPoly.one(2)
    with pytest.raises(UsageError):
        frobenius_power(P("x", 2), -1)


@pytest.mark.parametrize(
    ("f", "i", "p", "expected"),
    [("1 + x + x^2", 0, 2, "1 + x"), ("x^-1", 2, 3, "x^-1"), ("x^-1", 1, 3, "0"), ("x^5 + 2x^2", 2, 3, "x + 2")],
)
def test_cartier(f, i, p, expected):
    assert cartier_poly(P(f, p), i) == P(expected, p)


def test_cartier_digit_range():
    with pytest.raises(UsageError):
        cartier_poly(P("x", 3), 3)


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_cartier_reconstruction(p, data):
    f = data.draw(polys(p))
    rebuilt = LaurentPoly.zero(p)
    for i in range(p):
        rebuilt = rebuilt + cartier_poly(f, i).dilate(p).shift(i)
    assert rebuilt == f


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_mul_commutative_associative(p, data):
    a, b, c = (data.draw(polys(p, -6, 6, 4)) for _ in range(3))
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data(), k=st.integers(0, 3))
def test_frobenius_matches_repeated_mul(p, data, k):
    phi = data.draw(polys(p, -4, 4, 4))
    slow = LaurentPoly.one(p)
    for _ in range(p**k):
        slow = laurent_mul(slow, phi)
    assert frobenius_power(phi, p**k) == slow


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data(), n=st.integers(0, 30))
def test_power_is_repeated_mul(p, data, n):
    phi = data.draw(polys(p, -3, 3, 3))
    slow = LaurentPoly.one(p)
    for _ in range(n):
        slow = slow * phi
    assert phi**n == slow


@pytest.mark.parametrize(
    ("m", "base", "lsd"),
    [(10, -2, (0, 1, 1, 1, 1)), (-9, -2, (1, 1, 0, 1)), (0, 3, ()), (0, -5, ()), (5, 3, (2, 1))],
)
def test_encode_examples(m, base, lsd):
    d = encode_base(m, base)
    assert d.digits == lsd
    assert decode_base(d) == m


def test_msd_printing():
    assert str(encode_base(10, -2)) == "11110"
    assert str(encode_base(-9, -2)) == "1011"
    assert str(encode_base(0, 2)) == ""


@pytest.mark.parametrize(("digits", "base", "m"), [((0, 1, 1, 1, 1), -2, 10), ((), 2, 0), ((1,), -3, 1)])
def test_decode_examples(digits, base, m):
    assert decode_base(digits, base) == m


def test_negative_in_positive_base():
    with pytest.raises(UsageError):
        encode_base(-1, 3)


@pytest.mark.parametrize("p", PRIMES)
@pytest.mark.parametrize("sign", [1, -1])
def test_round_trip_exhaustive(p, sign):
    import numpy as np

    base = sign * p
    ms = range(-(10**6), 10**6 + 1) if sign < 0 else range(0, 10**6 + 1)
    # vectorised digit loop; the scalar functions are spot-checked below
    arr = np.fromiter(ms, dtype=np.int64)
    acc = np.zeros_like(arr)
    rest = arr.copy()
    w = 1
    while rest.any():
        d = rest % p
        acc += d * w
        rest = (rest - d) // base
        w *= base
    assert (acc == arr).all()
    for m in list(ms)[:: 9973]:
        assert decode_base(encode_base(m, base)) == m


@given(m=st.integers(-(10**6), 10**6), p=st.sampled_from(PRIMES))
def test_round_trip_negative_bases(m, p):
    assert decode_base(encode_base(m, -p)) == m
    if m >= 0:
        assert decode_base(encode_base(m, p)) == m


@pytest.mark.parametrize(
    ("point", "bases", "expected"),
    [((2, 1), (2, 2), [(0, 1), (1, 0)]), ((0, 0), (2, 2), []), ((10, 3), (-2, 2), [(0, 1), (1, 1), (1, 0), (1, 0), (1, 0)])],
)
def test_pair_encode(point, bases, expected):
    assert pair_encode(point, bases) == expected


@pytest.mark.parametrize(("base", "length"), [(2, 4), (-2, 5), (-3, 3), (3, 2)])
def test_base_range_is_tight(base, length):
    lo, hi = base_range(base, length)
    import itertools

    vals = {decode_base(w, base) for w in itertools.product(range(abs(base)), repeat=length)}
    assert (min(vals), max(vals)) == (lo, hi)
    assert vals == set(range(lo, hi + 1))


@pytest.mark.parametrize(
    ("text", "p"),
    [("x^-1 + x^-3 + x^-7", 2), ("x + 1", 3), ("2x^2 + x + 1 + x^-1", 3), ("1 + x^-1", 2), ("3x^4 + 4", 5)],
)
def test_parse_format_round_trip(text, p):
    f = parse_poly(text, p)
    assert parse_poly(format_poly(f), p) == f


@pytest.mark.parametrize("bad", ["", "x^", "+", "y + 1", "x^-"])
def test_parse_rejects(bad):
    with pytest.raises(UsageError):
        parse_poly(bad, 3)


def test_parse_reduces_mod_p():
    assert parse_poly("3x + 4 - x", 3) == LaurentPoly.from_dict(3, {1: 2, 0: 1})


@pytest.mark.parametrize("p", [1, 4, 9, 101])
def test_check_prime_rejects(p):
    with pytest.raises(UsageError):
        check_prime(p)


def test_mismatched_primes():
    with pytest.raises(UsageError):
        P("x", 2) + P("x", 3)


def test_digitstring_len():
    assert len(DigitString(-2, (1, 0, 1))) == 3
