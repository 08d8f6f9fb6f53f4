import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import D1, D2, exp_any, exp_pair, exps, guards
from gkat import automaton as A
from gkat.automaton import brzozowski
from gkat.errors import SalomaaError
from gkat.syntax import IfThenElse, Seq, While, parse
from gkat.trees import (
    TreeK,
    accept_set,
    const_tree,
    dead_tree,
    derivative,
    evaluate,
    extract_salomaa,
    load_system,
    normalize_tree,
    prune,
    solve_salomaa,
    system_distance,
    tree_cont,
    tree_distance,
    tree_loop,
    tree_seq,
    tree_union_b,
    unfold,
)
from oracles import naive_unfold

b = D1.atom_set([1])


def tree(src, k, decl=D1):
    return unfold(brzozowski(parse(src, decl)), 0, k)


def as_labels(t: TreeK) -> dict:
    return {w: t.label(c) if c >= 2 else ("accept" if c == 1 else "reject") for w, c in t.items()}


@given(exp_any(), st.integers(1, 4))
def test_unfold_matches_naive(e, k):
    X = brzozowski(e)
    assert as_labels(unfold(X, 0, k)) == naive_unfold(X, 0, k)


def test_unfold_dump_of_loop():
    t = tree("while b do p", 2)
    assert t.dump() == "!b -> 1\nb -> p\nb,!b -> 1\nb,b -> p\n"


def test_distance_examples():
    assert tree_distance(tree("0", 3), tree("1", 3)) == Fraction(1, 2)
    assert tree_distance(tree("p", 3), tree("p; p", 3)) == Fraction(1, 4)
    assert tree_distance(tree("p", 3), tree("p", 3)) == 0


@given(exps(D2, 6), exps(D2, 6), exps(D2, 6))
def test_distance_is_an_ultrametric(e, f, g):
    s, t, u = (evaluate(x, 4) for x in (e, f, g))
    assert tree_distance(s, t) == tree_distance(t, s)
    assert (tree_distance(s, t) == 0) == (s == t)
    assert tree_distance(s, u) <= max(tree_distance(s, t), tree_distance(t, u))


@given(exp_any(), st.integers(1, 5))
def test_compositional_semantics_matches_unfolding(e, k):
    assert evaluate(e, k) == unfold(brzozowski(e), 0, k)


@given(exp_pair(6), st.integers(1, 4))
def test_sourced_operations_match_syntax(pair, k):
    e, f = pair
    s, t = unfold(brzozowski(e), 0, k), unfold(brzozowski(f), 0, k)
    g = e.decl.atom_set([0])
    assert tree_seq(s, t) == evaluate(Seq(e, f), k)
    assert tree_union_b(s, t, g) == evaluate(IfThenElse(g, e, f), k)
    assert tree_loop(s, g) == evaluate(While(g, e), k)
    cont = tree_cont(s, t)
    X = A.continuation(brzozowski(e), 0, brzozowski(f), 0)
    assert cont == unfold(X, X.start, k)
    assert cont.source is not None


@given(exps(D2, 6), st.integers(1, 4))
def test_continuation_with_one_is_identity(e, k):
    s = evaluate(e, k)
    assert tree_cont(s, const_tree(D2.all_atoms(), k)) == s


@given(exp_any(), st.integers(1, 5))
def test_normalize_tree_matches_automaton(e, k):
    X = brzozowski(e)
    t = normalize_tree(unfold(X, 0, k))
    assert not t.approximate
    assert t == unfold(A.normalize(X), 0, k)


def test_normalize_drops_dead_branch():
    t = normalize_tree(tree("if b then p else (p; 0)", 3))
    assert t == tree("if b then p else 0", 3)
    bare = TreeK(D1, tree("p; 0", 3).levels)
    assert normalize_tree(bare).approximate


@given(exp_any(), st.integers(1, 4))
def test_prune_with_false_is_identity(e, k):
    t = unfold(brzozowski(e), 0, k)
    assert prune(t, lambda sub: False) == t


def test_dead_tree_and_accept_set():
    assert dead_tree(tree("p; 0", 3))
    assert not dead_tree(tree("while b do p", 3))
    assert accept_set(tree("while b do p", 2)) == ~b


def test_derivative_slices_subtree():
    t = tree("p; q", 3)
    d = derivative(t, 1)
    assert d == tree("q", 2)
    with pytest.raises(ValueError):
        derivative(tree("1", 2), 0)


@given(exp_any(), st.integers(1, 4))
def test_salomaa_solution_is_the_unfolding(e, k):
    X = brzozowski(e)
    sol = solve_salomaa(extract_salomaa(X), k)
    for i, t in enumerate(sol):
        assert t == unfold(X, i, k)


@given(exp_any())
def test_salomaa_iterates_contract(e):
    k = 5
    X = brzozowski(e)
    sol, its = solve_salomaa(extract_salomaa(X), k, history=True)
    for prev, cur, nxt in zip(its, its[1:], its[2:]):
        assert system_distance(cur, nxt) <= system_distance(prev, cur) / 2


def test_load_system():
    text = json.dumps(
        {
            "tests": ["b"],
            "actions": ["p"],
            "variables": ["x"],
            "equations": {"x": {"terms": [{"coef": "p", "guard": "b", "var": "x"}], "const": "!b"}},
        }
    )
    sys = load_system(text)
    (sol,) = solve_salomaa(sys, 3)
    assert sol == unfold(brzozowski(parse("while b do p", sys.decl)), 0, 3)
    assert "x = (p) . x [b]" in sys.to_text()


def test_load_system_rejects_bad_input():
    base = {"tests": ["b"], "actions": ["p"], "variables": ["x"]}
    with pytest.raises(SalomaaError, match="productive"):
        load_system(json.dumps({**base, "equations": {"x": {"terms": [{"coef": "1", "guard": "b", "var": "x"}]}}}))
    with pytest.raises(SalomaaError, match="overlap"):
        load_system(json.dumps({**base, "equations": {"x": {"terms": [{"coef": "p", "guard": "b", "var": "x"}], "const": "1"}}}))
    with pytest.raises(SalomaaError):
        load_system(json.dumps({**base, "equations": {"x": {"terms": [{"coef": "p", "guard": "b", "var": "y"}]}}}))
    with pytest.raises(SalomaaError):
        load_system("{")


@given(exps(D1, 6), guards(D1))
def test_guarded_union_of_a_tree_with_itself(e, g):
    s = evaluate(e, 3)
    assert tree_union_b(s, s, g) == s
