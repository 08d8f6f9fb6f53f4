"""Bisimilarity of automaton states and the two program equivalences.

``equiv0`` compares derivative automata directly (no early termination);
``equiv`` compares them after dead-state normalization, which identifies
programs that fail eventually with programs that fail immediately.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from gkat import _kernels as K
from gkat.automaton import Automaton, Outcome, Step, brzozowski, normalize
from gkat.bexp import TestDecl
from gkat.errors import DeclError
from gkat.generate import random_exp, random_guard, random_productive
from gkat.syntax import Exp, IfThenElse, Seq, Test, While, one, zero


def outcomes_agree(o1: Outcome, o2: Outcome) -> bool:
    """Same observation at one atom: both accept, both reject, or steps with one action."""
    if isinstance(o1, Step) and isinstance(o2, Step):
        return o1.action == o2.action
    return o1 == o2


@dataclass(frozen=True, eq=False)
class Bisimulation:
    """The pairs ``(x, y)`` whose union-find classes coincide."""

    X: Automaton
    Y: Automaton
    x_class: np.ndarray
    y_class: np.ndarray

    def pairs(self) -> Iterator[tuple[str, str]]:
        by_class: dict = {}
        for j, c in enumerate(self.y_class.tolist()):
            by_class.setdefault(c, []).append(j)
        for i, c in enumerate(self.x_class.tolist()):
            for j in by_class.get(c, ()):
                yield self.X.states[i], self.Y.states[j]

    def __contains__(self, pair) -> bool:
        x, y = pair
        return self.x_class[self.X.index(x)] == self.y_class[self.Y.index(y)]

    def verify(self) -> bool:
        return is_bisimulation(self.X, self.Y, self.pairs())


@dataclass(frozen=True)
class CounterTrace:
    """Atoms leading from the two start states to a point where they observably differ.

    Every atom but the last is a step taken with the same action on both sides.
    """

    word: tuple[int, ...]
    outcomes: tuple[Outcome, Outcome]

    def labels(self, decl: TestDecl) -> list[str]:
        return [decl.atom_label(a) for a in self.word]

    def replay(self, X: Automaton, x, Y: Automaton, y) -> bool:
        """Rerun the word from ``x`` and ``y`` and confirm the recorded divergence."""
        for a in self.word[:-1]:
            ox, oy = X.outcome(x, a), Y.outcome(y, a)
            if not (isinstance(ox, Step) and isinstance(oy, Step) and ox.action == oy.action):
                return False
            x, y = ox.target, oy.target
        a = self.word[-1]
        final = (X.outcome(x, a), Y.outcome(y, a))
        return final == self.outcomes and not outcomes_agree(*final)


@dataclass(frozen=True)
class EquivResult:
    equivalent: bool
    witness: Bisimulation | CounterTrace
    merges: int = 0

    def __bool__(self):
        return self.equivalent


def is_bisimulation(X: Automaton, Y: Automaton, pairs: Iterable[tuple]) -> bool:
    """Direct check of the bisimulation clauses for a relation between X and Y."""
    rel = {(X.index(x), Y.index(y)) for x, y in pairs}
    for i, j in rel:
        for a in X.decl.atoms:
            kx, ky = X.kind[i, a], Y.kind[j, a]
            if kx != ky:
                return False
            if kx == K.STEP:
                if X.act[i, a] != Y.act[j, a]:
                    return False
                if (int(X.tgt[i, a]), int(Y.tgt[j, a])) not in rel:
                    return False
    return True


def bisimilar(X: Automaton, x, Y: Automaton, y) -> EquivResult:
    """Union-find bisimilarity check with a counter-trace on failure."""
    if X.decl != Y.decl:
        raise DeclError("automata over different declarations")
    xi, yi = X.index(x), Y.index(y)
    n1 = len(X)
    kind = np.vstack([X.kind, Y.kind])
    act = np.vstack([X.act, Y.act])
    tgt = np.vstack([X.tgt.astype(np.int64), np.where(Y.tgt >= 0, Y.tgt.astype(np.int64) + n1, -1)])
    status, fail, atom, processed, parent, qx, qy, qpar, qatom = K.bisim(kind, act, tgt, xi, yi + n1)
    if status == K.BISIM_OK:
        roots = K.resolve_all(parent)
        return EquivResult(True, Bisimulation(X, Y, roots[:n1], roots[n1:]), int(processed))
    word = [int(atom)]
    i = int(fail)
    while qpar[i] >= 0:
        word.append(int(qatom[i]))
        i = int(qpar[i])
    word.reverse()
    u, v = int(qx[fail]), int(qy[fail]) - n1
    trace = CounterTrace(tuple(word), (X.outcome(u, int(atom)), Y.outcome(v, int(atom))))
    return EquivResult(False, trace, int(processed))


def _check_decl(e: Exp, f: Exp) -> None:
    if e.decl != f.decl:
        raise DeclError("expressions over different declarations")


def equiv0(e: Exp, f: Exp) -> EquivResult:
    """Equivalence without early termination: bisimilarity of the derivative automata."""
    _check_decl(e, f)
    return bisimilar(brzozowski(e), 0, brzozowski(f), 0)


def equiv(e: Exp, f: Exp) -> EquivResult:
    """Full equivalence: bisimilarity after pruning steps into dead states."""
    _check_decl(e, f)
    return bisimilar(normalize(brzozowski(e)), 0, normalize(brzozowski(f)), 0)


# -- axiom suite -------------------------------------------------------------------

AXIOMS = ("U1", "U2", "U3", "U4", "U5", "S1", "S2", "S3", "S4", "S5", "S6", "W1", "W2", "W3")


def axiom_instance(name: str, decl: TestDecl, rng: random.Random, depth: int = 5) -> tuple[Exp, Exp]:
    """A random instance ``(lhs, rhs)`` of the named axiom; metavariables get depth at most ``depth``."""
    d = depth
    e, f, g = (random_exp(decl, rng, d) for _ in range(3))
    b, c = random_guard(decl, rng), random_guard(decl, rng)
    if name == "U1":
        return IfThenElse(b, e, e), e
    if name == "U2":
        return IfThenElse(b, e, f), IfThenElse(~b, f, e)
    if name == "U3":
        return IfThenElse(c, IfThenElse(b, e, f), g), IfThenElse(b & c, e, IfThenElse(c, f, g))
    if name == "U4":
        return IfThenElse(b, e, f), IfThenElse(b, Seq(Test(b), e), f)
    if name == "U5":
        return IfThenElse(b, Seq(e, g), Seq(f, g)), Seq(IfThenElse(b, e, f), g)
    if name == "S1":
        return Seq(Seq(e, f), g), Seq(e, Seq(f, g))
    if name == "S2":
        return Seq(zero(decl), e), zero(decl)
    if name == "S3":
        return Seq(e, zero(decl)), zero(decl)
    if name == "S4":
        return Seq(one(decl), e), e
    if name == "S5":
        return e, Seq(e, one(decl))
    if name == "S6":
        return Seq(Test(b), Test(c)), Test(b & c)
    if name == "W1":
        return While(b, e), IfThenElse(b, Seq(e, While(b, e)), one(decl))
    if name == "W2":
        return While(b, Seq(Test(c), e)), While(b, IfThenElse(c, e, one(decl)))
    if name == "W3":
        # the solution of g = e.g +_b f for productive e
        p = random_productive(decl, rng, d)
        sol = Seq(While(b, p), f)
        return sol, IfThenElse(b, Seq(p, sol), f)
    raise KeyError(name)


@dataclass
class AxiomReport:
    name: str
    checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def check_axiom_suite(decl: TestDecl, samples: int = 200, seed: int = 0, depth: int = 5) -> list[AxiomReport]:
    """Check ``samples`` random instances of every axiom; S3 only holds for ``equiv``."""
    rng = random.Random(seed)
    reports = []
    for name in AXIOMS:
        decide = equiv if name == "S3" else equiv0
        failures = []
        for _ in range(samples):
            lhs, rhs = axiom_instance(name, decl, rng, depth)
            if not decide(lhs, rhs).equivalent:
                failures.append((lhs, rhs))
        reports.append(AxiomReport(name, samples, failures))
    return reports


__all__ = [
    "AXIOMS",
    "AxiomReport",
    "Bisimulation",
    "CounterTrace",
    "EquivResult",
    "axiom_instance",
    "bisimilar",
    "check_axiom_suite",
    "equiv",
    "equiv0",
    "is_bisimulation",
    "outcomes_agree",
]
