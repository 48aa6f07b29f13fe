"""Automata with output: evaluation, minimization, products and the text format."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcauto.algebra import pair_encode
from lcauto.dfao import (
    Dfao,
    all_words,
    combine,
    compose_affine,
    constant,
    decode_word,
    dumps,
    iso_check,
    load,
    loads,
    minimize,
    prune,
    reroot,
    save,
    symbol_digits,
    symbol_index,
)
from lcauto.errors import BudgetExceeded, DomainError, UsageError


@st.composite
def dfaos(draw, p=None, arity=None, max_states=6):
    p = draw(st.sampled_from([2, 3])) if p is None else p
    arity = draw(st.sampled_from([1, 2])) if arity is None else arity
    n = draw(st.integers(1, max_states))
    S = p**arity
    trans = np.array(draw(st.lists(st.integers(0, n - 1), min_size=n * S, max_size=n * S))).reshape(n, S)
    # zero digits loop on the initial state's output class, as in real automata
    outs = np.array(draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n)))
    for q in range(n):
        outs[trans[q, 0]] = outs[q] if trans[q, 0] == q else outs[trans[q, 0]]
    trans[:, 0] = np.arange(n)
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=arity, max_size=arity))
    return Dfao(p, tuple(s * p for s in signs), 0, outs, trans)


def test_running_example_values(running_dfao):
    assert [running_dfao.eval((m,)) for m in range(9)] == [0, 0, 1, 0, 0, 1, 1, 1, 2]
    assert running_dfao.eval((2,)) == 1 and running_dfao.eval((8,)) == 2


def test_empty_word_is_initial_output(running_dfao):
    assert running_dfao.eval((0,)) == running_dfao.outputs[running_dfao.initial]
    assert running_dfao.run([]) == running_dfao.initial


@pytest.mark.parametrize(("sym", "p", "k"), [(0, 2, 2), (5, 3, 2), (7, 2, 3), (24, 5, 2)])
def test_symbol_round_trip(sym, p, k):
    assert symbol_index(symbol_digits(sym, p, k), p) == sym


@given(a=dfaos())
def test_zero_padding_invariance(a):
    rng = np.random.default_rng(0)
    for _ in range(20):
        pt = tuple(int(rng.integers(-40, 41)) if b < 0 else int(rng.integers(0, 41)) for b in a.bases)
        word = [symbol_index(t, a.p) for t in pair_encode(pt, a.bases)]
        v = a.outputs[a.run(word)]
        for extra in range(1, 4):
            assert a.outputs[a.run(word + [0] * extra)] == v


@given(a=dfaos())
def test_minimize_preserves_function(a):
    m = minimize(a)
    assert m.n_states <= a.n_states
    for w in all_words(a.n_symbols, 5 if a.arity == 1 else 3):
        assert a.outputs[a.run(w)] == m.outputs[m.run(w)]


@given(a=dfaos())
def test_minimize_idempotent(a):
    m = minimize(a)
    assert iso_check(m, minimize(m)).isomorphic
    assert m.same_structure(minimize(m))


def test_minimize_exhaustive_length_12(running_closure):
    a = running_closure.dfao
    m = minimize(a)
    words = np.array(list(np.ndindex(*(3,) * 6)))  # all base-3 digit strings of length 6 per axis
    ms = (words * 3 ** np.arange(6)).sum(axis=1)
    pts = np.array([(x, y) for x in ms[:: 7] for y in ms[:: 11]])
    assert (a.eval_many(pts) == m.eval_many(pts)).all()


def test_structural_closure_minimizes_to_54(x_plus_1):
    from lcauto.presets import running_initial
    from lcauto.synthesis import kernel_closure

    clo = kernel_closure(x_plus_1, running_initial(), keys="structural")
    assert clo.report.states_before == 486
    assert minimize(clo.dfao).n_states == 54


def test_duplicated_states_merge(tm_dfao):
    n = tm_dfao.n_states
    trans = np.vstack([tm_dfao.trans, tm_dfao.trans])
    trans[0] = trans[0] + n  # route through the copy
    dup = Dfao(2, (2,), 0, np.concatenate([tm_dfao.outputs] * 2), trans)
    m = minimize(dup)
    assert m.n_states == n
    for w in all_words(2, 12):
        assert dup.outputs[dup.run(w)] == m.outputs[m.run(w)]


def test_minimal_input_stays_isomorphic(tm_dfao):
    assert minimize(tm_dfao).same_structure(prune(tm_dfao))


@given(a=dfaos(p=3, arity=1), b=dfaos(p=3, arity=1), op=st.sampled_from(["add", "sub", "mul"]))
def test_combine_pointwise(a, b, op):
    if a.bases != b.bases:
        with pytest.raises(UsageError):
            combine(a, b, op)
        return
    c = combine(a, b, op)
    f = {"add": lambda x, y: x + y, "sub": lambda x, y: x - y, "mul": lambda x, y: x * y}[op]
    ms = np.arange(-200, 201) if a.bases[0] < 0 else np.arange(0, 401)
    pts = ms[:, None]
    assert (c.eval_many(pts) == f(a.eval_many(pts), b.eval_many(pts)) % 3).all()


def test_combine_with_zero_and_self(running_dfao):
    z = constant(3, (3,), 0)
    assert iso_check(combine(running_dfao, z), running_dfao).isomorphic
    twice = combine(running_dfao, combine(running_dfao, running_dfao, "add"), "add")
    assert minimize(twice).n_states == 1 and minimize(twice).outputs[0] == 0


def test_combine_budget(running_dfao, tm_dfao):
    with pytest.raises(BudgetExceeded):
        combine(running_dfao, running_dfao.with_initial(1), budget=1)
    with pytest.raises(UsageError):
        combine(running_dfao, tm_dfao)


def test_reroot(running_dfao):
    assert reroot(running_dfao, running_dfao.initial).same_structure(prune(running_dfao))
    for s in range(running_dfao.n_states):
        assert reroot(running_dfao, s).eval((0,)) == running_dfao.outputs[s]


def test_iso_check_witness():
    a = constant(2, (2,), 0)
    outs = np.array([0, 1])
    b = Dfao(2, (2,), 0, outs, np.array([[0, 1], [1, 1]]))
    rep = iso_check(a, b)
    assert not rep.isomorphic
    assert rep.values == (0, 1)
    assert a.eval(rep.point) != b.eval(rep.point)
    assert decode_word([symbol_index(t, 2) for t in rep.witness], 2, (2,)) == rep.point


@pytest.mark.parametrize("c", [-3, -2, -1, 0, 1, 2, 3])
@pytest.mark.parametrize("base_sign", [1, -1])
def test_compose_affine_offsets(tm_dfao, c, base_sign):
    # base -2 copy of Thue-Morse, zero on negative m
    a = tm_dfao if base_sign > 0 else compose_affine(tm_dfao, 0, [1], 0, in_bases=(-2,))
    sh = compose_affine(a, 0, [1], c)
    ms = np.arange(0, 3000) if base_sign > 0 else np.arange(-1500, 1500)
    got = sh.eval_many(ms[:, None])
    want = np.array([a.eval((m + c,)) if (base_sign < 0 or m + c >= 0) else 0 for m in ms])
    assert (got == want).all()


@pytest.mark.parametrize(("coeffs", "const"), [((1, -1), 0), ((1, -2), 1), ((-1, 1), -2)])
def test_compose_affine_two_axes(running_negp, coeffs, const):
    a = running_negp
    t = compose_affine(a, 0, coeffs, const)
    rng = np.random.default_rng(5)
    pts = np.column_stack([rng.integers(-300, 300, 300), rng.integers(0, 300, 300)])
    want = np.array([a.eval((coeffs[0] * m + coeffs[1] * n + const, n)) for m, n in pts])
    assert (t.eval_many(pts) == want).all()


def test_compose_affine_rejects():
    a = constant(2, (2, 2))
    with pytest.raises(UsageError):
        compose_affine(a, 0, [1], 0)
    with pytest.raises(UsageError):
        compose_affine(a, 0, [1, 0], 0, in_bases=(2, -2))


@given(a=dfaos())
def test_text_format_round_trip(a):
    b = loads(dumps(a))
    assert b.same_structure(a) and dumps(b) == dumps(a)


def test_save_load(tmp_path, running_negp):
    path = tmp_path / "m.txt"
    save(running_negp, path)
    assert load(path).same_structure(running_negp)
    assert path.read_text().startswith("# dfao v1")


@pytest.mark.parametrize(
    "text",
    ["", "# dfao v1\np 3\n", "# dfao v2\np 2\narity 1\naxis_bases 2\nstates 1\ninitial 0\noutputs 0\ntransitions\n0 0\n"],
)
def test_loads_rejects(text):
    with pytest.raises(UsageError):
        loads(text)


@pytest.mark.parametrize(
    ("kwargs", "msg"),
    [
        (dict(p=2, bases=(3,), initial=0, outputs=[0], trans=[[0, 0]]), "bases"),
        (dict(p=2, bases=(2,), initial=1, outputs=[0], trans=[[0, 0]]), "initial"),
        (dict(p=2, bases=(2,), initial=0, outputs=[2], trans=[[0, 0]]), "outputs"),
        (dict(p=2, bases=(2,), initial=0, outputs=[0], trans=[[0, 1]]), "target"),
    ],
)
def test_constructor_validation(kwargs, msg):
    with pytest.raises(UsageError, match=msg):
        Dfao(**kwargs)


def test_outputs_read_only(tm_dfao):
    with pytest.raises(ValueError):
        tm_dfao.outputs[0] = 1


def test_eval_rejects_negative_on_positive_axis(tm_dfao):
    with pytest.raises(DomainError):
        tm_dfao.eval((-1,))


def test_eval_grid_layout(running_negp):
    g = running_negp.eval_grid(-3, 4, 1, 2)
    assert g.shape == (2, 8)
    assert g[1, 0] == running_negp.eval((-3, 2))
