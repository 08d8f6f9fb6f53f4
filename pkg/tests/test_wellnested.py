import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkat.automaton import ACCEPT, REJECT, Automaton, Step, brzozowski, discrete, normalize
from gkat.bexp import TestDecl
from gkat.coequations import check_alternation
from gkat.equivalence import bisimilar
from gkat.errors import StateBoundError
from gkat.syntax import parse
from gkat.wellnested import (
    Leaf,
    Node,
    build_wellnested,
    fixtures,
    is_wellnested_bounded,
    random_derivation,
    render,
    replay,
    verify_cert,
)

D = TestDecl(["t0", "t1"], ["p", "q"])


def unrooted(X):
    return Automaton(X.decl, X.states, X.kind, X.act, X.tgt, None)


def test_nested_pair_is_wellnested():
    fx = fixtures()
    res = is_wellnested_bounded(fx.fig5)
    assert res.wellnested
    assert verify_cert(fx.fig5, res.cert)
    assert "continue" in render(res.cert)


def test_nested_pair_quotient():
    fx = fixtures()
    Q = fx.fig5_quotient
    assert len(Q) == 6
    assert bisimilar(fx.fig5, "v1", fx.fig5, "v4")
    assert bisimilar(fx.fig5, "v3", fx.fig5, "v6")
    ok, cert = is_wellnested_bounded(Q)
    assert not ok and cert is None


def test_alternating_pair_is_not_wellnested():
    assert not is_wellnested_bounded(fixtures().fig4).wellnested


def test_loop_is_wellnested():
    X = fixtures().loop
    ok, cert = is_wellnested_bounded(X)
    assert ok and verify_cert(X, cert)


def test_build_by_hand():
    x = Leaf(discrete(D, [D.all_atoms()], ["x"]))
    y = Leaf(discrete(D, [D.all_atoms()], ["y"]))
    h = (ACCEPT, Step("p", "y"), Step("q", "x"), REJECT)
    Z = build_wellnested(Node(x, y, h), start="x")
    assert Z.row("x") == list(h)
    assert Z.row("y") == [ACCEPT] * 4
    assert is_wellnested_bounded(Z).wellnested


@settings(max_examples=60)
@given(st.integers(0, 2**32), st.integers(1, 6))
def test_random_derivations_are_found_and_pass(seed, n):
    cert = random_derivation(D, random.Random(seed), n)
    X = unrooted(replay(cert))
    assert len(X) == n
    assert check_alternation(X).passed
    res = is_wellnested_bounded(X)
    assert res.wellnested
    assert verify_cert(X, res.cert)


def test_expression_automata_are_wellnested():
    for src in ["while t0 do (p; while t1 do q)", "if t0 then p else (q; q)", "while t0 & t1 do p; q"]:
        X = normalize(brzozowski(parse(src, D)))
        assert is_wellnested_bounded(unrooted(X)).wellnested, src


def test_certificate_for_other_automaton_fails():
    fx = fixtures()
    _, cert = is_wellnested_bounded(fx.loop)
    assert not verify_cert(fx.fig4, cert)


def test_state_bound():
    X = brzozowski(parse("p;p;p;p;p;p;p;p;p;p;p", D))
    with pytest.raises(StateBoundError):
        is_wellnested_bounded(X, max_states=10)
    assert is_wellnested_bounded(X, max_states=12).wellnested
