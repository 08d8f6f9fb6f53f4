import json

from hypothesis import given

from conftest import D1, exp_any
from gkat.automaton import brzozowski, discrete
from gkat.bexp import TestDecl
from gkat.coequations import check_alternation, check_discrete, step_sccs
from gkat.syntax import parse
from gkat.wellnested import fixtures, two_state_alternating


def test_discrete():
    assert check_discrete(discrete(D1, [D1.all_atoms()]))
    assert not check_discrete(brzozowski(parse("p", D1)))


def test_alternating_pair_is_flagged_for_both_atoms():
    d = TestDecl(["t"], ["p", "q"])
    for a in (0, 1):
        b = d.atom_set([a])
        report = check_alternation(two_state_alternating(b))
        assert not report.passed
        v = report.violation
        assert {v.x, v.y} == {"v0", "v1"}
        assert set(v.scc) == {"v0", "v1"}
        assert "violation" in report.text()
        json.dumps(report.to_dict())


def test_loop_fixture_passes():
    report = check_alternation(fixtures().loop)
    assert report.passed
    assert report.to_dict() == {"passed": True, "violation": None}


@given(exp_any())
def test_expression_automata_pass(e):
    assert check_alternation(brzozowski(e)).passed


def test_step_sccs_ignore_acyclic_states():
    X = brzozowski(parse("p; while b do q", D1))
    sccs = step_sccs(X, X.reachable())
    assert len(sccs) == 1 and len(sccs[0]) == 1


def test_unreachable_cycle_is_ignored():
    X = two_state_alternating(D1.atom_set([1]))
    assert not check_alternation(X.with_start("v0")).passed
