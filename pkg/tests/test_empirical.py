"""Guess-and-verify automata from grid oracles."""
from __future__ import annotations

import numpy as np
import pytest

from lcauto.dfao import iso_check, minimize
from lcauto.empirical import empirical_kernel, window_for
from lcauto.errors import UsageError
from lcauto.lca import SpacetimeGrid, generate_grid
from lcauto.presets import figure, running_initial


def test_running_example_matches_exact_engine(running_closure, x_plus_1):
    oracle = lambda w: generate_grid(x_plus_1, running_initial(), w)
    res = empirical_kernel(oracle, 3, (3, 3), suffix_len=3, max_len=7, verify_len=7)
    assert res.verified and res.mismatches == 0
    assert res.dfao.n_states == 54
    assert iso_check(res.dfao, minimize(running_closure.dfao)).isomorphic


def test_zero_grid():
    grid = SpacetimeGrid(2, 0, 255, 0, 255, np.zeros((256, 256), dtype=np.uint8))
    res = empirical_kernel(grid, 2, (2, 2), suffix_len=2, max_len=8)
    assert res.verified and res.dfao.n_states == 1


def test_fig6_lower_half():
    f = figure("fig6")
    res = empirical_kernel(f.grid, 2, (-2, -2), suffix_len=5, max_len=12, verify_len=12)
    assert res.verified, res.reason
    assert res.dfao.n_states == 210
    # the verify window covers a 3^5-wide square around the origin
    m0, m1, n0, n1 = res.window
    assert m0 <= -121 and m1 >= 121 and n0 <= -121 and n1 >= 121


def test_too_little_evidence_fails_honestly():
    f = figure("fig6")
    res = empirical_kernel(f.grid, 2, (-2, -2), suffix_len=3, max_len=6, min_suffix=3)
    assert not res.verified and res.dfao is None
    assert res.reason


def test_wrong_guess_is_caught(x_plus_1):
    # one suffix digit of evidence merges distinct states; verification must object
    oracle = lambda w: generate_grid(x_plus_1, running_initial(), w)
    res = empirical_kernel(oracle, 3, (3, 3), suffix_len=1, max_len=6, min_suffix=1)
    assert not res.verified and res.mismatches > 0


@pytest.mark.parametrize(
    "kwargs",
    [dict(bases=(3, 2)), dict(bases=(3, 3), verify_len=3, max_len=5), dict(bases=(3, 3), min_suffix=5)],
)
def test_argument_checks(kwargs):
    grid = SpacetimeGrid(3, 0, 10, 0, 10, np.zeros((11, 11), dtype=np.uint8))
    with pytest.raises(UsageError):
        empirical_kernel(grid, 3, **kwargs)


def test_oracle_must_cover_window():
    grid = SpacetimeGrid(2, 0, 10, 0, 10, np.zeros((11, 11), dtype=np.uint8))
    with pytest.raises(UsageError):
        empirical_kernel(grid, 2, (2, 2), suffix_len=2, max_len=6)


def test_window_for():
    assert window_for((2, -2), 3) == (0, 7, -2, 5)


def test_report_lines(x_plus_1):
    oracle = lambda w: generate_grid(x_plus_1, running_initial(), w)
    res = empirical_kernel(oracle, 3, (3, 3), suffix_len=3, max_len=7)
    assert res.lines()[0] == "verified: True"
