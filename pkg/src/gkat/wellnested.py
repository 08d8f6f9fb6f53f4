"""Well-nested automata: certificates, a bounded decision procedure, and fixtures.

An automaton is well-nested if it is discrete, or it arises as
``(X + Y)[X, h]`` from well-nested ``X`` and ``Y``: the disjoint union where
every accepting entry of an X-state on atom ``a`` is replaced by ``h(a)``.

Reading such a decomposition backwards from a given automaton V, with V's
states split into an X-part and a transition-closed Y-part:

* an X-state stepping into Y on ``a`` must come from ``h(a)``, so the
  underlying X accepts there;
* an X-state accepting on ``a`` forces ``h(a) = accept``;
* otherwise ``h(a)`` may be a step into the X-part, and any nonempty set of
  X-states taking exactly that step may have been accepting in X.

Accept entries of X that ``h`` turns into rejects are never needed: making
accepting entries reject keeps an automaton well-nested (by induction on the
construction), so such an X can be replaced by one that already rejects.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from gkat import automaton as A
from gkat.automaton import ACCEPT, REJECT, Automaton, Step
from gkat.bexp import AtomSet, TestDecl
from gkat.coequations import check_alternation
from gkat.errors import AutomatonError, GkatError, StateBoundError
from gkat.syntax import Act, While

DEFAULT_MAX_STATES = 10


@dataclass(frozen=True, eq=False)
class Leaf:
    automaton: Automaton


@dataclass(frozen=True, eq=False)
class Node:
    x: "Cert"
    y: "Cert"
    h: tuple  # one outcome per atom
    restored: tuple = ()  # (state, atom) entries of X that h overwrites

    @property
    def x_states(self) -> tuple:
        return replay(self.x).states

    @property
    def y_states(self) -> tuple:
        return replay(self.y).states


Cert = Union[Leaf, Node]


def replay(cert: Cert) -> Automaton:
    """The automaton a derivation denotes; states are X's followed by Y's."""
    if isinstance(cert, Leaf):
        if cert.automaton.has_steps():
            raise AutomatonError("leaf of a derivation must be discrete")
        return cert.automaton
    X, Y = replay(cert.x), replay(cert.y)
    Z = A.coproduct(X, Y, tags=None)
    return A.uniform_continuation(Z, X.states, list(cert.h))


def reorder(X: Automaton, states: Iterable, start=None) -> Automaton:
    """The same automaton with states listed in the given order."""
    order = [X.index(s) for s in states]
    if sorted(order) != list(range(len(X))):
        raise AutomatonError("not a permutation of the states")
    inverse = np.empty(len(X), np.int64)
    inverse[order] = np.arange(len(X))
    tgt = np.where(X.tgt >= 0, inverse[np.where(X.tgt >= 0, X.tgt, 0)], -1)[order]
    st = None if start is None else order.index(X.index(start))
    return Automaton(X.decl, tuple(X.states[i] for i in order), X.kind[order], X.act[order], tgt, st)


def build_wellnested(cert: Cert, states: Iterable | None = None, start=None) -> Automaton:
    """Replay a derivation, optionally listing the states in a given order."""
    Z = replay(cert)
    if states is not None:
        Z = reorder(Z, states, start)
    elif start is not None:
        Z = Z.with_start(start)
    return Z


def render(cert: Cert, indent: str = "") -> str:
    """Indented text form of a derivation."""
    if isinstance(cert, Leaf):
        names = ", ".join(cert.automaton.states) or "(empty)"
        return f"{indent}discrete {{{names}}}\n"
    X = replay(cert.x)
    decl = X.decl
    hs = []
    for a, o in enumerate(cert.h):
        if X.decl.num_atoms and any(X.kind[i, a] == 1 for i in range(len(X))):
            hs.append(f"{decl.atom_label(a)}: {_outcome_text(o)}")
    out = f"{indent}continue {{{', '.join(X.states)}}} with h = [{'; '.join(hs)}]\n"
    out += f"{indent}  X-part:\n" + render(cert.x, indent + "    ")
    out += f"{indent}  Y-part:\n" + render(cert.y, indent + "    ")
    return out


def _outcome_text(o) -> str:
    return f"{o.action} -> {o.target}" if isinstance(o, Step) else o


def random_derivation(decl: TestDecl, rng: random.Random, size: int, prefix: str = "s") -> Cert:
    """A random derivation whose automaton has ``size`` states named ``{prefix}0``, ``{prefix}1``, ..."""
    counter = itertools.count()

    def build(n: int) -> Cert:
        if n == 1 or rng.random() < 0.2:
            names = [f"{prefix}{next(counter)}" for _ in range(n)]
            accepts = [decl.atom_set([a for a in decl.atoms if rng.random() < 0.5]) for _ in names]
            return Leaf(A.discrete(decl, accepts, names))
        nx = rng.randint(1, n - 1)
        x, y = build(nx), build(n - nx)
        targets = replay(x).states + replay(y).states
        h = []
        for _ in decl.atoms:
            r = rng.random()
            if r < 0.3:
                h.append(ACCEPT)
            elif r < 0.45:
                h.append(REJECT)
            else:
                h.append(Step(rng.choice(decl.actions), rng.choice(targets)))
        return Node(x, y, tuple(h))

    return build(size)


# -- bounded search --------------------------------------------------------------------


class _Search:
    def __init__(self, decl: TestDecl):
        self.decl = decl
        self.m = decl.num_atoms
        self.memo: dict = {}
        self.visited = 0

    def automaton(self, states: tuple, rows: dict) -> Automaton:
        table = {s: dict(enumerate(rows[s])) for s in states}
        return A.from_table(self.decl, states, table)

    def solve(self, states: tuple, rows: dict) -> Cert | None:
        key = (states, tuple(rows[s] for s in states))
        if key in self.memo:
            return self.memo[key]
        self.visited += 1
        self.memo[key] = None  # no derivation may rely on itself
        result = self._solve(states, rows)
        self.memo[key] = result
        return result

    def _solve(self, states: tuple, rows: dict) -> Cert | None:
        if not any(isinstance(o, Step) for s in states for o in rows[s]):
            return Leaf(self.automaton(states, rows))
        V = self.automaton(states, rows)
        if not check_alternation(V).passed:
            return None
        succ = {s: {o.target for o in rows[s] if isinstance(o, Step)} for s in states}
        for size in range(0, len(states)):
            for ys in itertools.combinations(states, size):
                yset = set(ys)
                if any(not succ[y] <= yset for y in ys):
                    continue
                cert = self._try_split(states, rows, yset)
                if cert is not None:
                    return cert
        return None

    def _try_split(self, states, rows, yset) -> Cert | None:
        xs = tuple(s for s in states if s not in yset)
        ys = tuple(s for s in states if s in yset)
        h: list = [REJECT] * self.m
        forced: list = []  # (state, atom) entries that X must accept
        choices = []  # per free atom: list of (h value, restored states)
        for a in range(self.m):
            vals = {rows[x][a] for x in xs}
            into_y = {o for o in vals if isinstance(o, Step) and o.target in yset}
            accepts = ACCEPT in vals
            if len(into_y) + accepts > 1:
                return None
            if into_y:
                (o,) = into_y
                h[a] = o
                forced.extend((x, a) for x in xs if rows[x][a] == o)
            elif accepts:
                h[a] = ACCEPT
            else:
                opts = [(REJECT, ())]
                for o in sorted({o for o in vals if isinstance(o, Step)}):
                    cands = [x for x in xs if rows[x][a] == o]
                    for r in range(1, len(cands) + 1):
                        for sub in itertools.combinations(cands, r):
                            opts.append((o, sub))
                choices.append((a, opts))
        y_cert = None
        if ys:
            y_cert = self.solve(ys, {y: rows[y] for y in ys})
            if y_cert is None:
                return None
        else:
            y_cert = Leaf(self.automaton((), {}))
        for combo in itertools.product(*(opts for _, opts in choices)):
            restored = list(forced)
            hh = list(h)
            for (a, _), (o, sub) in zip(choices, combo):
                hh[a] = o
                restored.extend((x, a) for x in sub)
            if not ys and not restored:
                continue
            xrows = {x: list(rows[x]) for x in xs}
            for x, a in restored:
                xrows[x][a] = ACCEPT
            xrows = {x: tuple(r) for x, r in xrows.items()}
            x_cert = self.solve(xs, xrows)
            if x_cert is not None:
                return Node(x_cert, y_cert, tuple(hh), tuple(sorted(restored)))
        return None


@dataclass(frozen=True)
class SearchResult:
    wellnested: bool
    cert: Cert | None
    visited: int

    def __iter__(self):
        return iter((self.wellnested, self.cert))


def is_wellnested_bounded(X: Automaton, max_states: int = DEFAULT_MAX_STATES) -> SearchResult:
    """Exhaustive search for a well-nested derivation of ``X`` (all states, start ignored)."""
    if len(X) > max_states:
        raise StateBoundError(f"{len(X)} states exceed the search bound of {max_states}")
    search = _Search(X.decl)
    rows = {s: tuple(X.row(s)) for s in X.states}
    cert = search.solve(X.states, rows)
    return SearchResult(cert is not None, cert, search.visited)


def verify_cert(X: Automaton, cert: Cert) -> bool:
    """Whether the derivation rebuilds ``X`` state for state."""
    try:
        Z = reorder(replay(cert), X.states)
    except (GkatError, KeyError):
        return False
    return Z == Automaton(X.decl, X.states, X.kind, X.act, X.tgt, None)


# -- fixtures -------------------------------------------------------------------------


@dataclass(frozen=True)
class Fixtures:
    fig4: Automaton
    fig5: Automaton
    fig5_quotient: Automaton
    loop: Automaton

    def get(self, name: str) -> Automaton:
        if name not in FIXTURE_NAMES:
            raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
        return getattr(self, name)


FIXTURE_NAMES = ("fig4", "fig5", "fig5_quotient", "loop")


def two_state_alternating(b: AtomSet, p: str = "p", q: str = "q") -> Automaton:
    """v0 accepts outside ``b`` and steps ``b|p`` to v1; v1 accepts ``b`` and steps ``!b|q`` to v0."""
    decl = b.decl
    table = {
        "v0": {a: (Step(p, "v1") if a in b else ACCEPT) for a in decl.atoms},
        "v1": {a: (ACCEPT if a in b else Step(q, "v0")) for a in decl.atoms},
    }
    return A.from_table(decl, ("v0", "v1"), table, "v0")


def nested_pair() -> Automaton:
    """Eight states over atoms a0..a3 (two tests), every edge labelled ``p``.

    v0 and v2 swap on a2, leave on a3, and accept a0, a1; v5 and v7 mirror
    this with the atom roles exchanged.  v1, v3, v4, v6 reject everything.
    """
    decl = TestDecl(["t0", "t1"], ["p"])
    p = "p"
    table = {
        "v0": {0: ACCEPT, 1: ACCEPT, 2: Step(p, "v2"), 3: Step(p, "v1")},
        "v2": {0: ACCEPT, 1: ACCEPT, 2: Step(p, "v0"), 3: Step(p, "v3")},
        "v5": {0: Step(p, "v4"), 1: Step(p, "v7"), 2: ACCEPT, 3: ACCEPT},
        "v7": {0: Step(p, "v6"), 1: Step(p, "v5"), 2: ACCEPT, 3: ACCEPT},
    }
    return A.from_table(decl, tuple(f"v{i}" for i in range(8)), table, "v0")


def fixtures(b: AtomSet | None = None) -> Fixtures:
    """The named example automata; ``b`` parameterizes the two-state alternating one."""
    if b is None:
        decl = TestDecl(["b"], ["p", "q"])
        b = decl.atom_set([1])
    fig5 = nested_pair()
    quotient, _ = A.quotient(fig5, [("v1", "v4"), ("v3", "v6")])
    loop = A.brzozowski(While(b, Act(b.decl, b.decl.actions[0])))
    return Fixtures(two_state_alternating(b), fig5, quotient, loop)


__all__ = [
    "FIXTURE_NAMES",
    "Cert",
    "Fixtures",
    "Leaf",
    "Node",
    "SearchResult",
    "build_wellnested",
    "fixtures",
    "is_wellnested_bounded",
    "nested_pair",
    "random_derivation",
    "render",
    "reorder",
    "replay",
    "two_state_alternating",
    "verify_cert",
]
