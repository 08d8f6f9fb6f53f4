"""Checks on finite automata against the discrete and nesting coequations.

``check_alternation`` is a necessary condition only: behaviours of
expressions never accept complementary atom sets infinitely often along one
branch, and a cycle through two states with complementary accept sets
produces exactly such a branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from gkat import _kernels as K
from gkat.automaton import Automaton
from gkat.bexp import AtomSet, atomset_to_bexp


def check_discrete(X: Automaton) -> bool:
    """True iff no state ever steps."""
    return not X.has_steps()


@dataclass(frozen=True)
class Violation:
    scc: tuple  # state ids, in automaton order
    x: str
    y: str
    b: AtomSet  # accept set of y; x accepts exactly the complement


@dataclass(frozen=True)
class NestingReport:
    passed: bool
    violation: Violation | None = None

    def to_dict(self) -> dict:
        out = {"passed": self.passed, "violation": None}
        if self.violation is not None:
            v = self.violation
            out["violation"] = {"scc": list(v.scc), "x": v.x, "y": v.y, "b": v.b.labels(), "b_expr": str(atomset_to_bexp(v.b))}
        return out

    def text(self) -> str:
        if self.passed:
            return "passed: no cycle joins states with complementary accept sets\n"
        v = self.violation
        return (
            f"violation: {v.x} accepts {atomset_to_bexp(~v.b)} and {v.y} accepts {atomset_to_bexp(v.b)}\n"
            f"  on a cycle through {{{', '.join(v.scc)}}}\n"
        )


def step_sccs(X: Automaton, states: list[int]) -> list[list[int]]:
    """Strongly connected components of the step graph on ``states`` that contain a cycle."""
    n = len(X)
    keep = np.zeros(n, bool)
    keep[states] = True
    src, atom = np.nonzero(X.kind == K.STEP)
    dst = X.tgt[src, atom]
    mask = keep[src] & keep[dst]
    src, dst = src[mask], dst[mask]
    graph = csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    self_loop = np.zeros(n, bool)
    self_loop[src[src == dst]] = True
    groups: dict = {}
    for s in sorted(states):
        groups.setdefault(int(labels[s]), []).append(s)
    return [g for g in groups.values() if len(g) > 1 or self_loop[g[0]]]


def check_alternation(X: Automaton) -> NestingReport:
    """Look for two states with complementary accept sets on a common cycle.

    Only states reachable from the start are considered (all states when
    there is no start).
    """
    full = (1 << X.decl.num_atoms) - 1
    for scc in sorted(step_sccs(X, X.reachable()), key=min):
        by_bits: dict = {}
        for s in scc:
            by_bits.setdefault(X.accept_set(s).bits, s)
        for x in scc:
            bits = X.accept_set(x).bits
            y = by_bits.get(~bits & full)
            if y is not None:
                return NestingReport(
                    False,
                    Violation(tuple(X.states[s] for s in scc), X.states[x], X.states[y], X.accept_set(y)),
                )
    return NestingReport(True)


__all__ = ["NestingReport", "Violation", "check_alternation", "check_discrete", "step_sccs"]
