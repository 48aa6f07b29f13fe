"""Powers, certificates, zero patches, frequencies, complexity and periodicity."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from lcauto.analysis import (
    Inconclusive,
    certify_power_free,
    complexity,
    decide_power_fixed,
    detect_constant_config,
    empirical_frequencies,
    empirical_power_bound,
    eventual_period_check,
    find_powers,
    find_powers_1d,
    fit_quadratic,
    letter_frequencies,
    offset_automaton,
)
from lcauto.dfao import compose_affine, constant, iso_check, minimize
from lcauto.errors import UsageError
from lcauto.lca import GeneratingPolynomial, SpacetimeGrid, generate_grid
from lcauto.presets import coincidence_example, running_example, running_initial, thue_morse
from lcauto.substitution import (
    InitialCondition,
    coded_prefix,
    parity_substitution,
    subst_to_dfao,
    substitution,
)

LEDRAPPIER2 = GeneratingPolynomial.parse("1 + x^-1", 2)
LEDRAPPIER3 = GeneratingPolynomial.parse("1 + x^-1", 3)


@pytest.fixture(scope="module")
def diagram54(running_closure):
    return minimize(running_closure.dfao)


def zero_grid(w=40, h=5):
    return SpacetimeGrid(2, 0, w - 1, 0, h - 1, np.zeros((h, w), dtype=np.uint8))


def test_zero_grid_powers_everywhere():
    ws = find_powers(zero_grid(), 3, 1)
    assert len(ws) == 5 * (40 - 2)
    assert {(w.m, w.n) for w in ws} == {(m, n) for m in range(38) for n in range(5)}


def test_thue_morse_row_has_no_cubes():
    assert find_powers_1d(coded_prefix(thue_morse(), 0, 10**4), 3, 8) == []
    assert find_powers_1d(coded_prefix(thue_morse(), 0, 10**4), 2, 3, limit=1)


def test_running_diagram_has_squares(x_plus_1):
    g = generate_grid(x_plus_1, running_initial(), (0, 80, 0, 5))
    ws = find_powers(g, 2, 1, limit=1)
    assert (ws[0].m, ws[0].n, ws[0].period) == (0, 0, 1)


def test_power_argument_checks():
    with pytest.raises(UsageError):
        find_powers(zero_grid(), 1, 3)
    with pytest.raises(UsageError):
        decide_power_fixed(constant(2, (2,), 0), 2, 0)


@pytest.mark.parametrize("c", [-3, -2, -1, 0, 1, 2, 3])
def test_offset_automaton_base_p(tm_dfao, c):
    off = offset_automaton(tm_dfao, c)
    ms = np.arange(0, 10**5 + 1)
    u = coded_prefix(thue_morse(), 0, 10**5 + 4)
    want = np.where(ms + c >= 0, u[np.clip(ms + c, 0, None)], 0)
    assert (off.eval_many(ms[:, None]) == want).all()


@pytest.mark.parametrize("c", [-3, -2, -1, 0, 1, 2, 3])
def test_offset_automaton_base_negp(running_negp, c):
    off = offset_automaton(running_negp, c)
    ms = np.arange(-(10**5), 10**5 + 1, 37)
    for n in (0, 5):
        pts = np.column_stack([ms, np.full_like(ms, n)])
        src = np.column_stack([ms + c, np.full_like(ms, n)])
        assert (off.eval_many(pts) == running_negp.eval_many(src)).all()


def test_offset_zero_and_composition(tm_dfao):
    assert iso_check(offset_automaton(tm_dfao, 0), tm_dfao).isomorphic
    twice = offset_automaton(offset_automaton(tm_dfao, 1), 1)
    assert iso_check(twice, offset_automaton(tm_dfao, 2)).isomorphic
    with pytest.raises(UsageError):
        offset_automaton(tm_dfao, 10**6)


def test_decide_zero_automaton():
    w = decide_power_fixed(constant(2, (2,), 0), 2, 3)
    assert w.period == 1


def test_decide_thue_morse_row(tm_dfao):
    assert decide_power_fixed(tm_dfao, 3, 8) is None
    assert find_powers_1d(coded_prefix(thue_morse(), 0, 10**5), 3, 8) == []
    sq = decide_power_fixed(tm_dfao, 2, 3)
    u = coded_prefix(thue_morse(), 0, sq.m + 2 * sq.period)
    assert list(u[sq.m : sq.m + sq.period]) == list(u[sq.m + sq.period :])


@pytest.mark.parametrize("M", [2, 3])
@pytest.mark.parametrize("period", [1, 2, 3, 4])
def test_decide_agrees_with_scan(diagram54, x_plus_1, M, period):
    w = decide_power_fixed(diagram54, M, period, periods=[period])
    g = generate_grid(x_plus_1, running_initial(), (0, 3**7, 0, 200))
    scan = find_powers(g, M, period, periods=[period], limit=1)
    assert (w is None) == (not scan)
    if w is not None:
        row = g.row(w.n)
        seg = row[w.m : w.m + M * period]
        assert (seg[:-period] == seg[period:]).all()


def test_decide_budget(diagram54):
    with pytest.raises(Inconclusive):
        decide_power_fixed(diagram54, 4, 9, budget=5)


def test_certificate_running_example(running_dfao, x_plus_1):
    cert = certify_power_free(running_example(), 0, x_plus_1)
    assert cert.issued and cert.theorem == "T6.5"
    assert cert.bound == 9 * cert.empirical_M
    assert "empirical" in "\n".join(cert.lines())
    # consistent with the exact bounded decision on the row automaton
    assert decide_power_fixed(running_dfao, 20, 27) is None


def test_certificate_parity_p3():
    cert = certify_power_free(parity_substitution(3), 0, LEDRAPPIER3)
    assert cert.issued and cert.theorem == "T6.8"
    M = cert.empirical_M
    assert cert.bound == max((0 + 1) * 9 * M, -(-9 * (2 * M - 1) // 2))


def test_certificate_rejects_parity_p2():
    cert = certify_power_free(parity_substitution(2), 0, LEDRAPPIER2)
    assert not cert.issued
    assert ("p does not divide L = 2", False) in cert.hypotheses


def test_certificate_rejects_non_bijective():
    cert = certify_power_free(substitution({"0": "001", "1": "111", "2": "220"}, coding=[0, 1, 2], p=3), 0,
                              GeneratingPolynomial.parse("x+1", 3))
    assert not cert.issued


def test_empirical_power_bound():
    assert empirical_power_bound([0, 0, 0, 1], 2) == 4
    assert empirical_power_bound(coded_prefix(thue_morse(), 0, 10**4), 16) == 3


@pytest.fixture(scope="module")
def coincidence_prediction():
    return detect_constant_config(coincidence_example(), "a", LEDRAPPIER2)


def test_detect_coincidence(coincidence_prediction):
    pred = coincidence_prediction
    assert pred.verdict == "yes"
    assert (pred.coincidence.depth, pred.coincidence.column) == (4, 4)


def test_predicted_blocks_are_zero(coincidence_prediction, tm_dfao):
    right = subst_to_dfao(coincidence_example(), "a")
    for b in coincidence_prediction.predicted_blocks:
        if b.row > 5000:
            continue
        g = generate_grid(LEDRAPPIER2, InitialCondition(right), (b.start, b.start + b.length - 1, 0, b.row))
        assert not g.row(b.row).any(), b
    lengths = {b.length for b in coincidence_prediction.predicted_blocks}
    assert {1, 2, 4, 8, 16} <= lengths


def test_detect_ledrappier_any_automatic():
    assert detect_constant_config(thue_morse(), 0, LEDRAPPIER2).verdict == "yes"
    assert detect_constant_config(substitution({"0": "01", "1": "00"}, coding=[0, 1], p=2), 0,
                                  LEDRAPPIER2).verdict == "yes"


def test_detect_unknown_for_nonzero_sum(x_plus_1):
    pred = detect_constant_config(running_example(), 0, x_plus_1)
    assert pred.verdict == "unknown" and pred.coefficient_sum == 2


def test_detect_normalizes_left_radius():
    phi = GeneratingPolynomial.parse("x^2 + x", 2)
    pred = detect_constant_config(thue_morse(), 0, phi)
    assert pred.normalized_phi == "1 + x^-1" and pred.verdict == "yes"


@pytest.mark.parametrize(
    ("theta", "expected"),
    [
        (running_example(), (Fraction(1, 3),) * 3),
        (thue_morse(), (Fraction(1, 2),) * 2),
        (substitution({"0": "00"}, coding=[0], p=2), (Fraction(1),)),
        (substitution({"0": "01", "1": "00"}, coding=[0, 1], p=2), (Fraction(2, 3), Fraction(1, 3))),
    ],
)
def test_letter_frequencies(theta, expected):
    assert letter_frequencies(theta) == expected


def test_frequencies_need_primitive():
    with pytest.raises(UsageError):
        letter_frequencies(substitution({"0": "00", "1": "11"}, coding=[0, 1], p=2))


# the running example's discrepancy decays like n^(-1/2); at exactly 10^6 it is 1.1e-3
@pytest.mark.parametrize(
    ("theta", "n"),
    [(running_example(), 3**13), (coincidence_example(), 10**6), (parity_substitution(5), 10**6)],
)
def test_frequencies_match_counts(theta, n):
    from lcauto.substitution import fixed_point_prefix

    letters = fixed_point_prefix(theta, 0, n)
    emp = empirical_frequencies(letters, theta.size)
    exact = np.array([float(f) for f in letter_frequencies(theta)])
    assert 0.5 * np.abs(emp - exact).sum() < 1e-3


def test_complexity_small_cases(x_plus_1):
    assert complexity(SpacetimeGrid(2, 0, 9, 0, 9, np.zeros((10, 10), dtype=np.uint8)), 3, 4) == 1
    g = generate_grid(x_plus_1, running_initial(), (0, 242, 0, 242))
    assert complexity(g, 1, 1) <= 3
    assert complexity(g, 2, 1) <= 9
    with pytest.raises(UsageError):
        complexity(g, 300, 1)


def test_complexity_brute_force(x_plus_1):
    g = generate_grid(x_plus_1, running_initial(), (0, 60, 0, 40))
    for m, n in [(2, 3), (5, 5), (7, 2)]:
        blocks = {g.values[i : i + n, j : j + m].tobytes() for i in range(g.height - n + 1)
                  for j in range(g.width - m + 1)}
        assert complexity(g, m, n) == len(blocks)


def test_quadratic_fit(x_plus_1):
    g = generate_grid(x_plus_1, running_initial(), (0, 728, 0, 728))
    fit = fit_quadratic(g)
    assert fit.ok and fit.K > 0
    assert all(c <= 2 * fit.K * s * s for s, c in zip(fit.sizes, fit.counts))


@pytest.mark.parametrize(
    ("prefix", "bounds", "expected"),
    [
        ([0, 1] * 500, (5, 10), (0, 2)),
        ([2, 2, 2] + [0, 1, 1] * 300, (5, 10), (3, 3)),
        (list(coded_prefix(running_example(), 0, 3000)), (200, 1000), None),
        (list(coded_prefix(parity_substitution(3), 0, 3000)), (64, 1000), None),
    ],
)
def test_eventual_period(prefix, bounds, expected):
    assert eventual_period_check(prefix, *bounds) == expected


def test_eventual_period_needs_long_prefix():
    with pytest.raises(UsageError):
        eventual_period_check([0, 1, 0], 2, 2)
