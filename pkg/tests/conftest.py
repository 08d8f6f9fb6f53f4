import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gkat.bexp import AtomSet, TestDecl
from gkat.syntax import Act, IfThenElse, Seq, Test, While

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=300, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

D1 = TestDecl(["b"], ["p", "q"])
D2 = TestDecl(["b", "c"], ["p", "q"])
D3 = TestDecl(["t1", "t2", "t3"], ["p", "q", "r"])


def guards(decl):
    return st.integers(0, (1 << decl.num_atoms) - 1).map(lambda bits: AtomSet(decl, bits))


def exps(decl, max_leaves=10):
    leaves = st.one_of(guards(decl).map(Test), st.sampled_from(decl.actions).map(lambda p: Act(decl, p)))

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda t: Seq(*t)),
            st.tuples(guards(decl), children, children).map(lambda t: IfThenElse(*t)),
            st.tuples(guards(decl), children).map(lambda t: While(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


any_decl = st.sampled_from([D1, D2, D3])


@st.composite
def exp_any(draw, max_leaves=10):
    decl = draw(any_decl)
    return draw(exps(decl, max_leaves))


@st.composite
def exp_pair(draw, max_leaves=8):
    decl = draw(any_decl)
    return draw(exps(decl, max_leaves)), draw(exps(decl, max_leaves))


# -- acceptance reporting ----------------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, text: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)

    return record
