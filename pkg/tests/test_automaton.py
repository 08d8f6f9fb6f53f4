import json
import re

import numpy as np
import pytest
from hypothesis import given

from conftest import D1, D2, exp_any
from gkat.automaton import (
    ACCEPT,
    REJECT,
    Step,
    brzozowski,
    coproduct,
    dead_states,
    discrete,
    export_dot,
    export_json,
    from_table,
    guarded_loop,
    guarded_union,
    import_json,
    is_homomorphism,
    normalize,
    quotient,
    quotient_by_bisimilarity,
    reconstruct,
    sequence,
    subautomaton,
    uniform_continuation,
)
from gkat.equivalence import bisimilar
from gkat.errors import AutomatonError, NameResolutionError
from gkat.syntax import IfThenElse, Seq, While, parse, size_bound
from oracles import naive_bisimilar, naive_live

b = D1.atom_set([1])
NB, B = 0, 1  # atoms of D1: b false, b true


def test_brzozowski_of_action():
    X = brzozowski(parse("p", D1))
    assert len(X) == 2
    assert X.row("x0") == [Step("p", "x1"), Step("p", "x1")]
    assert X.row("x1") == [ACCEPT, ACCEPT]


def test_brzozowski_of_while():
    X = brzozowski(parse("while b do p", D1))
    assert X.outcome("x0", NB) == ACCEPT
    step = X.outcome("x0", B)
    assert step.action == "p"
    assert bisimilar(X, step.target, X, "x0")


def test_brzozowski_of_zero_sequence():
    X = brzozowski(parse("p; 0", D1))
    assert X.row("x1") == [REJECT, REJECT]


def test_reconstruct_shape():
    e = parse("p", D1)
    r = reconstruct(e)
    assert isinstance(r, IfThenElse)
    assert r.guard.is_empty()
    assert bisimilar(brzozowski(e), 0, brzozowski(r), 0)


@given(exp_any())
def test_reconstruct_is_bisimilar(e):
    assert bisimilar(brzozowski(e), 0, brzozowski(reconstruct(e)), 0)


@given(exp_any())
def test_state_count_bounded(e):
    assert len(brzozowski(e)) <= size_bound(e)


def test_from_table_missing_entries_reject():
    X = from_table(D1, ["s"], {"s": {B: ACCEPT}}, "s")
    assert X.row("s") == [REJECT, ACCEPT]
    with pytest.raises(AutomatonError):
        from_table(D1, ["s"], {"s": {B: Step("p", "t")}})
    with pytest.raises(NameResolutionError):
        X.index("t")


def test_coproduct_and_subautomaton():
    X = brzozowski(parse("p", D1))
    Y = brzozowski(parse("q; q", D1))
    Z = coproduct(X, Y)
    assert len(Z) == len(X) + len(Y)
    assert Z.outcome("1:x0", B) == Step("q", "1:x1")
    S = subautomaton(Z, ["1:x0", "1:x1", "1:x2"], start="1:x0")
    assert bisimilar(S, 0, Y, 0)
    with pytest.raises(AutomatonError, match="closed"):
        subautomaton(Z, ["1:x0"])
    with pytest.raises(AutomatonError, match="clash"):
        coproduct(X, X, tags=None)


def test_uniform_continuation_replaces_accepts_only():
    X = brzozowski(parse("if b then p else 1", D1))
    h = [Step("q", "x0"), REJECT]
    Y = uniform_continuation(X, ["x0"], h)
    assert Y.outcome("x0", NB) == Step("q", "x0")
    assert Y.outcome("x0", B) == X.outcome("x0", B)
    assert Y.row("x1") == X.row("x1")


def test_combinators_match_syntax():
    e, f = parse("p; if b then q else 1", D1), parse("while b do q", D1)
    X, Y = brzozowski(e), brzozowski(f)
    for Z, g in [
        (sequence(X, 0, Y, 0), Seq(e, f)),
        (guarded_union(X, 0, Y, 0, b), IfThenElse(b, e, f)),
        (guarded_loop(X, 0, b), While(b, e)),
    ]:
        assert bisimilar(Z, Z.start, brzozowski(g), 0)


def test_quotient_of_loop_has_one_state():
    X = brzozowski(parse("while b do p", D1))
    Q, h = quotient_by_bisimilarity(X)
    assert len(Q) == 1
    assert is_homomorphism(X, Q, h)


@given(exp_any())
def test_quotient_is_homomorphic_and_minimal(e):
    X = brzozowski(e)
    Q, h = quotient_by_bisimilarity(X)
    assert is_homomorphism(X, Q, h)
    for u in Q.states:
        for v in Q.states:
            assert (u == v) == naive_bisimilar(Q, u, Q, v)


def test_quotient_by_pairs_rejects_non_bisimilar():
    X = brzozowski(parse("p; q", D1))
    with pytest.raises(AutomatonError):
        quotient(X, [("x0", "x1")])
    Q, h = quotient(X, [("x0", "x0")])
    assert len(Q) == len(X)


@given(exp_any())
def test_dead_states_match_fixpoint(e):
    X = brzozowski(e)
    live = naive_live(X)
    assert [s not in live for s in X.states] == dead_states(X).tolist()


@given(exp_any())
def test_normalize_idempotent_and_keeps_accepts(e):
    X = brzozowski(e)
    N = normalize(X)
    assert normalize(N) == N
    assert np.array_equal(N.kind == 1, X.kind == 1)
    dead = dead_states(N)
    steps = N.kind == 2
    assert not np.any(steps & dead[np.where(N.tgt >= 0, N.tgt, 0)])


def test_normalize_example():
    N = normalize(brzozowski(parse("p; 0", D1)))
    assert N.row("x0") == [REJECT, REJECT]


@given(exp_any())
def test_json_roundtrip(e):
    X = brzozowski(e)
    assert import_json(export_json(X)) == X


def test_json_errors():
    X = brzozowski(parse("p", D1))
    data = json.loads(export_json(X))
    with pytest.raises(AutomatonError):
        import_json("{not json")
    with pytest.raises(AutomatonError, match="different"):
        import_json(json.dumps(data), D2)
    data["delta"]["x0"]["b"] = {"act": "p", "to": "nowhere"}
    with pytest.raises(AutomatonError):
        import_json(json.dumps(data))
    data["delta"]["x0"]["b"] = {"act": "zzz", "to": "x1"}
    with pytest.raises(NameResolutionError):
        import_json(json.dumps(data))


def test_dot_output_is_well_formed():
    dot = export_dot(brzozowski(parse("while b do (p; if b then q else 1)", D1)))
    assert dot.startswith("digraph gkat {") and dot.rstrip().endswith("}")
    assert dot.count("{") == dot.count("}")
    assert re.search(r'-> "x\d+" \[label="b\|p"\]', dot)
    assert 'color="black:black"' in dot


def test_discrete_automaton():
    X = discrete(D1, [b, ~b])
    assert not X.has_steps()
    assert X.accept_set("d1") == ~b


def test_action_must_be_declared():
    with pytest.raises(NameResolutionError):
        from_table(D1, ["s"], {"s": {B: Step("zzz", "s")}})
