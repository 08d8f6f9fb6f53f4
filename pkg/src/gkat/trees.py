"""Depth-k truncations of behaviour trees and the operations on them.

A tree of depth ``k`` over ``m`` atoms is stored as ``k`` level arrays; level
``l`` has one int32 entry per atom word of length ``l + 1`` (first atom most
significant), so the derivative along an atom is a contiguous slice.  Codes:
``-1`` outside the domain, ``0`` reject, ``1`` accept, ``2 + i`` action ``i``.

A tree may remember the automaton state it was unfolded from (``source``);
deadness is then decided exactly on that automaton.  Operations on two such
trees build the matching automaton so the result stays exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from gkat import _kernels as K
from gkat import automaton as A
from gkat.automaton import Automaton
from gkat.bexp import AtomSet, TestDecl, denote, parse_bexp
from gkat.errors import DeclError, SalomaaError
from gkat.syntax import Act, Exp, IfThenElse, Seq, Test, While, fold, guarded_sum, is_productive, parse

UNDEFINED = -1


@dataclass(frozen=True, eq=False)
class TreeK:
    decl: TestDecl
    levels: tuple
    source: tuple | None = field(default=None, repr=False)  # (automaton, root state index)
    states: tuple | None = field(default=None, repr=False)  # per level: state reached, or -1
    approximate: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels)

    def __eq__(self, other):
        if not isinstance(other, TreeK):
            return NotImplemented
        return (
            self.decl == other.decl
            and self.depth == other.depth
            and all(np.array_equal(x, y) for x, y in zip(self.levels, other.levels))
        )

    __hash__ = None

    def value(self, word: Sequence[int]) -> int:
        """Code at a word (``-1`` when outside the domain or beyond the depth)."""
        if not word or len(word) > self.depth:
            return UNDEFINED
        idx = 0
        for a in word:
            idx = idx * self.decl.num_atoms + a
        return int(self.levels[len(word) - 1][idx])

    def truncate(self, k: int) -> "TreeK":
        if not 1 <= k <= self.depth:
            raise ValueError(f"cannot truncate depth {self.depth} to {k}")
        states = None if self.states is None else self.states[:k]
        return TreeK(self.decl, self.levels[:k], self.source, states, self.approximate)

    def label(self, code: int) -> str:
        return str(code) if code < 2 else self.decl.actions[code - 2]

    def items(self):
        """``(word, code)`` over the domain, by length and then lexicographically."""
        m = self.decl.num_atoms
        for l, lev in enumerate(self.levels):
            for idx in np.nonzero(lev >= 0)[0].tolist():
                digits = np.unravel_index(idx, (m,) * (l + 1)) if l else (idx,)
                yield tuple(int(d) for d in digits), int(lev[idx])

    def dump(self) -> str:
        lines = []
        for word, code in self.items():
            lines.append(f"{','.join(self.decl.atom_label(a) for a in word)} -> {self.label(code)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "entries": [
                {"word": [self.decl.atom_label(a) for a in w], "value": self.label(c)} for w, c in self.items()
            ],
        }


def _frozen(levels) -> tuple:
    out = []
    for lev in levels:
        lev = np.ascontiguousarray(lev, dtype=np.int32)
        lev.setflags(write=False)
        out.append(lev)
    return tuple(out)


def _check_same(*trees: TreeK) -> TestDecl:
    decl = trees[0].decl
    for t in trees[1:]:
        if t.decl != decl:
            raise DeclError("trees over different declarations")
    return decl


# -- construction -----------------------------------------------------------------


def unfold(X: Automaton, x, k: int) -> TreeK:
    """The behaviour of state ``x`` truncated to words of length at most ``k``."""
    if k < 1:
        raise ValueError("depth must be at least 1")
    root = X.index(x)
    levels = K.unfold_levels(X.kind, X.act.astype(np.int64), X.tgt.astype(np.int64), root, k)
    return TreeK(X.decl, _frozen([lv for lv, _ in levels]), (X, root), tuple(st for _, st in levels))


def const_tree(b: AtomSet, k: int) -> TreeK:
    """The tree of a test: accept on ``b``, reject elsewhere."""
    decl = b.decl
    src = A.discrete(decl, [b])
    return unfold(src, 0, k)


def action_tree(decl: TestDecl, name: str, k: int) -> TreeK:
    src = A.brzozowski(Act(decl, name))
    return unfold(src, 0, k)


def derivative(t: TreeK, a: int) -> TreeK:
    """The subtree below atom ``a``; requires ``t(a)`` to be an action and depth at least 2."""
    if t.levels[0][a] < 2 or t.depth < 2:
        raise ValueError("no derivative along this atom")
    m = t.decl.num_atoms
    levels = [lev[a * m**l : (a + 1) * m**l] for l, lev in enumerate(t.levels[1:], start=1)]
    source = states = None
    if t.source is not None:
        source = (t.source[0], int(t.states[0][a]))
        states = tuple(st[a * m**l : (a + 1) * m**l] for l, st in enumerate(t.states[1:], start=1))
    return TreeK(t.decl, _frozen(levels), source, states, t.approximate)


def _with_source(decl, levels, X: Automaton | None, root: int | None, approximate=False) -> TreeK:
    levels = _frozen(levels)
    if X is None:
        return TreeK(decl, levels, approximate=approximate)
    u = unfold(X, root, len(levels))
    return TreeK(decl, levels, u.source, u.states, approximate)


# -- the operations, level by level -------------------------------------------------


def _first_atom(l: int, m: int) -> np.ndarray:
    return np.arange(m ** (l + 1)) // m**l


def _splice(s, tail, l: int, j0: int, m: int) -> np.ndarray:
    """Level ``l`` of "run ``s``; where ``s`` accepts after ``j`` atoms, continue with ``tail``
    on the suffix starting at that same atom" (only prefixes of length ``>= j0`` count)."""
    idx = np.arange(m ** (l + 1))
    out = np.array(s[l], dtype=np.int32, copy=True)
    for j in range(j0, l + 2):
        hit = s[j - 1][idx // m ** (l + 1 - j)] == 1
        if hit.any():
            out[hit] = tail[l + 1 - j][idx[hit] % m ** (l + 2 - j)]
    return out


def tree_seq(s: TreeK, t: TreeK) -> TreeK:
    """``s . t``: ``t`` takes over, on the same atom, wherever ``s`` accepts."""
    decl = _check_same(s, t)
    m = decl.num_atoms
    k = min(s.depth, t.depth)
    levels = [_splice(s.levels, t.levels, l, 1, m) for l in range(k)]
    X = root = None
    if s.source and t.source:
        X = A.sequence(s.source[0], s.source[1], t.source[0], t.source[1])
        root = X.start
    return _with_source(decl, levels, X, root, s.approximate or t.approximate)


def tree_union_b(s: TreeK, t: TreeK, b: AtomSet) -> TreeK:
    """``s +_b t``: behave as ``s`` when the first atom is in ``b``, else as ``t``."""
    decl = _check_same(s, t)
    m = decl.num_atoms
    k = min(s.depth, t.depth)
    inb = np.array([a in b for a in range(m)])
    levels = [np.where(inb[_first_atom(l, m)], s.levels[l], t.levels[l]) for l in range(k)]
    X = root = None
    if s.source and t.source:
        X = A.guarded_union(s.source[0], s.source[1], t.source[0], t.source[1], b)
        root = X.start
    return _with_source(decl, levels, X, root, s.approximate or t.approximate)


def _restart_levels(t: TreeK, head: np.ndarray, enter: np.ndarray) -> list:
    """Levels of a tree that re-enters ``t`` whenever ``t`` accepts after at least one step.

    ``head`` gives the value on length-one words; deeper words exist only below
    atoms where ``enter`` holds.
    """
    m = t.decl.num_atoms
    out = [head.astype(np.int32)]
    for l in range(1, t.depth):
        lev = _splice(t.levels, out, l, 2, m)
        out.append(np.where(enter[_first_atom(l, m)], lev, UNDEFINED).astype(np.int32))
    return out


def tree_loop(t: TreeK, b: AtomSet) -> TreeK:
    """``t^(b)``: accept outside ``b``; inside ``b`` run ``t`` and loop when it accepts."""
    m = t.decl.num_atoms
    inb = np.array([a in b for a in range(m)])
    t0 = t.levels[0]
    enter = inb & (t0 >= 2)
    head = np.where(inb, np.where(t0 >= 2, t0, 0), 1)
    levels = _restart_levels(t, head, enter)
    X = root = None
    if t.source:
        X = A.guarded_loop(t.source[0], t.source[1], b)
        root = X.start
    return _with_source(t.decl, levels, X, root, t.approximate)


def tree_cont(s: TreeK, t: TreeK) -> TreeK:
    """``s |> t``: wherever ``s`` accepts, run ``t``, restarting it each time it accepts."""
    decl = _check_same(s, t)
    m = decl.num_atoms
    k = min(s.depth, t.depth)
    t0 = t.levels[0]
    restart = _restart_levels(t.truncate(k), t0, t0 >= 2)
    levels = [_splice(s.levels, restart, l, 1, m) for l in range(k)]
    X = root = None
    if s.source and t.source:
        X = A.continuation(s.source[0], s.source[1], t.source[0], t.source[1])
        root = X.start
    return _with_source(decl, levels, X, root, s.approximate or t.approximate)


def accept_set(t: TreeK) -> AtomSet:
    return t.decl.atom_set(np.nonzero(t.levels[0] == 1)[0].tolist())


def dead_tree(t: TreeK) -> bool:
    """Whether ``t`` has no accepting leaf: exact with a source, else judged within the depth."""
    if t.source is not None:
        X, root = t.source
        return bool(A.dead_states(X)[root])
    return not _possibly_live(t)[0].any()


def _possibly_live(t: TreeK) -> list:
    """Per level, whether the subtree at each word might accept.

    A word is possibly live if it accepts, or it is an action at the depth
    horizon, or one of its children is possibly live.
    """
    m = t.decl.num_atoms
    k = t.depth
    live = [None] * k
    live[k - 1] = (t.levels[k - 1] == 1) | (t.levels[k - 1] >= 2)
    for l in range(k - 2, -1, -1):
        below = live[l + 1].reshape(-1, m).any(axis=1)
        live[l] = (t.levels[l] == 1) | ((t.levels[l] >= 2) & below)
    return live


def _apply_prune(t: TreeK, kill: list, approximate: bool) -> TreeK:
    """Set killed action entries to 0 and drop everything below them."""
    m = t.decl.num_atoms
    levels = []
    alive_parent = None
    for l, lev in enumerate(t.levels):
        lev = np.where(kill[l] & (lev >= 2), 0, lev)
        if alive_parent is not None:
            lev = np.where(np.repeat(alive_parent, m), lev, UNDEFINED)
        levels.append(lev)
        alive_parent = lev >= 2
    return TreeK(t.decl, _frozen(levels), approximate=approximate)


def prune(t: TreeK, pred: Callable[[TreeK], bool]) -> TreeK:
    """Entries whose subtree satisfies ``pred`` are set to reject.

    ``pred`` sees the subtree below each action entry, truncated at the depth
    horizon; entries on the last level have no subtree and are kept.
    """
    m = t.decl.num_atoms
    kill = []
    for l, lev in enumerate(t.levels):
        mask = np.zeros(lev.shape, bool)
        if l + 1 < t.depth:
            for idx in np.nonzero(lev >= 2)[0].tolist():
                sub = _subtree(t, l, idx)
                mask[idx] = bool(pred(sub))
        kill.append(mask)
    return _apply_prune(t, kill, t.approximate)


def _subtree(t: TreeK, l: int, idx: int) -> TreeK:
    m = t.decl.num_atoms
    levels = [t.levels[j][idx * m ** (j - l) : (idx + 1) * m ** (j - l)] for j in range(l + 1, t.depth)]
    source = states = None
    if t.source is not None:
        source = (t.source[0], int(t.states[l][idx]))
        states = tuple(t.states[j][idx * m ** (j - l) : (idx + 1) * m ** (j - l)] for j in range(l + 1, t.depth))
    return TreeK(t.decl, _frozen(levels), source, states, t.approximate)


def normalize_tree(t: TreeK) -> TreeK:
    """Steps into dead subtrees become rejects.

    Exact when ``t`` carries its source automaton; otherwise deadness is judged
    within the depth and the result is marked approximate.
    """
    if t.source is not None:
        X, root = t.source
        dead = A.dead_states(X)
        kill = [(lev >= 2) & dead[np.where(st >= 0, st, 0)] for lev, st in zip(t.levels, t.states)]
        out = _apply_prune(t, kill, t.approximate)
        N = A.normalize(X)
        return TreeK(out.decl, out.levels, (N, root), _states_after(N, root, out), t.approximate)
    live = _possibly_live(t)
    m = t.decl.num_atoms
    kill = []
    for l in range(t.depth):
        if l + 1 < t.depth:
            below = live[l + 1].reshape(-1, m).any(axis=1)
            kill.append(~below)
        else:
            kill.append(np.zeros(t.levels[l].shape, bool))
    return _apply_prune(t, kill, True)


def _states_after(X: Automaton, root: int, t: TreeK) -> tuple:
    return unfold(X, root, t.depth).states


def tree_distance(s: TreeK, t: TreeK) -> Fraction:
    """``2 ** -n`` for the shortest word of length ``n`` on which both are defined and differ.

    A word in only one domain always sits below a common word where the two
    differ, so common-domain disagreements suffice.
    """
    _check_same(s, t)
    if s.depth != t.depth:
        raise ValueError("trees of different depth")
    for l in range(s.depth):
        a, b = s.levels[l], t.levels[l]
        if np.any((a >= 0) & (b >= 0) & (a != b)):
            return Fraction(1, 2 ** (l + 1))
    return Fraction(0)


# -- compositional semantics --------------------------------------------------------


def evaluate(e: Exp, k: int) -> TreeK:
    """The tree of ``e`` computed from the tree operations, without any automaton."""
    decl = e.decl
    m = decl.num_atoms

    def bare(levels):
        return TreeK(decl, _frozen(levels))

    def step(n, *cs):
        if isinstance(n, Test):
            head = np.array([1 if a in n.guard else 0 for a in range(m)], np.int32)
            return bare([head] + [np.full(m ** (l + 1), UNDEFINED, np.int32) for l in range(1, k)])
        if isinstance(n, Act):
            return bare(
                [np.full(m, 2 + n.index, np.int32)] + [np.full(m ** (l + 1), 1 if l == 1 else UNDEFINED, np.int32) for l in range(1, k)]
            )
        if isinstance(n, Seq):
            return tree_seq(cs[0], cs[1])
        if isinstance(n, IfThenElse):
            return tree_union_b(cs[0], cs[1], n.guard)
        if isinstance(n, While):
            return tree_loop(cs[0], n.guard)
        raise TypeError(n)

    return fold(e, step)


# -- Salomaa systems ----------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    coef: Exp
    guard: AtomSet
    var: int


@dataclass(frozen=True)
class SalomaaSystem:
    """``x_i = e_i1 . x_1 +_{b_i1} ... +_{b_in} c_i`` for each variable ``x_i``."""

    decl: TestDecl
    variables: tuple
    rows: tuple  # per variable: tuple of Term
    consts: tuple  # per variable: AtomSet

    def validate(self) -> None:
        for i, (terms, c) in enumerate(zip(self.rows, self.consts)):
            seen = c
            for term in terms:
                if not is_productive(term.coef):
                    raise SalomaaError(f"coefficient of {self.variables[term.var]} in {self.variables[i]} is not productive")
                if not (seen & term.guard).is_empty():
                    raise SalomaaError(f"guards in the equation for {self.variables[i]} overlap")
                seen = seen | term.guard

    def to_text(self) -> str:
        from gkat.bexp import atomset_to_bexp

        lines = []
        for i, (terms, c) in enumerate(zip(self.rows, self.consts)):
            parts = [f"({t.coef}) . {self.variables[t.var]} [{atomset_to_bexp(t.guard)}]" for t in terms]
            parts.append(f"[{atomset_to_bexp(c)}]")
            lines.append(f"{self.variables[i]} = " + " + ".join(parts))
        return "\n".join(lines) + "\n"


def extract_salomaa(X: Automaton) -> SalomaaSystem:
    """One equation per state: guarded actions into each successor plus the accept set."""
    decl = X.decl
    rows = []
    consts = []
    for i in range(len(X)):
        by_target: dict = {}
        for a in decl.atoms:
            if X.kind[i, a] == K.STEP:
                by_target.setdefault(int(X.tgt[i, a]), []).append(a)
        terms = []
        for j in sorted(by_target):
            atoms = by_target[j]
            coef = guarded_sum(decl, [(a, Act(decl, decl.actions[X.act[i, a]])) for a in atoms])
            terms.append(Term(coef, decl.atom_set(atoms), j))
        rows.append(tuple(terms))
        consts.append(X.accept_set(i))
    return SalomaaSystem(decl, X.states, tuple(rows), tuple(consts))


def _salomaa_step(sys: SalomaaSystem, coefs, current: list, k: int) -> list:
    out = []
    for i, terms in enumerate(sys.rows):
        acc = const_tree(sys.consts[i], k)
        for term, s in reversed(list(zip(terms, coefs[i]))):
            acc = tree_union_b(tree_seq(s, current[term.var]), acc, term.guard)
        out.append(TreeK(sys.decl, acc.levels))
    return out


def solve_salomaa(sys: SalomaaSystem, k: int, history: bool = False):
    """Iterate the system map ``k`` times from all-reject trees; exact to depth ``k``.

    With ``history=True`` returns the list of all iterates as well.
    """
    sys.validate()
    coefs = [[evaluate(t.coef, k) for t in terms] for terms in sys.rows]
    zero = TreeK(sys.decl, const_tree(sys.decl.no_atoms(), k).levels)
    current = [zero] * len(sys.variables)
    iterates = [current]
    for _ in range(k):
        current = _salomaa_step(sys, coefs, current, k)
        iterates.append(current)
    if history:
        return tuple(current), iterates
    return tuple(current)


def system_distance(u: Sequence[TreeK], v: Sequence[TreeK]) -> Fraction:
    return max((tree_distance(a, b) for a, b in zip(u, v)), default=Fraction(0))


def load_system(text: str) -> SalomaaSystem:
    """Read the JSON system format.

    ``{"tests": [...], "actions": [...], "variables": ["x", ...], "equations":
    {"x": {"terms": [{"coef": "p", "guard": "b", "var": "x"}], "const": "!b"}}}``
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SalomaaError(f"invalid JSON: {exc}") from None
    try:
        decl = TestDecl(data["tests"], data["actions"])
        variables = tuple(data["variables"])
        index = {v: i for i, v in enumerate(variables)}
        rows, consts = [], []
        for v in variables:
            eq = data["equations"].get(v, {})
            terms = []
            for term in eq.get("terms", []):
                if term["var"] not in index:
                    raise SalomaaError(f"unknown variable {term['var']!r}")
                terms.append(Term(parse(term["coef"], decl), denote(parse_bexp(term["guard"], decl), decl), index[term["var"]]))
            rows.append(tuple(terms))
            consts.append(denote(parse_bexp(eq.get("const", "0"), decl), decl))
    except (KeyError, TypeError, AttributeError) as exc:
        raise SalomaaError(f"malformed system: {exc!r}") from None
    sys = SalomaaSystem(decl, variables, tuple(rows), tuple(consts))
    sys.validate()
    return sys


__all__ = [
    "SalomaaSystem",
    "Term",
    "TreeK",
    "accept_set",
    "action_tree",
    "const_tree",
    "dead_tree",
    "derivative",
    "evaluate",
    "extract_salomaa",
    "load_system",
    "normalize_tree",
    "prune",
    "solve_salomaa",
    "system_distance",
    "tree_cont",
    "tree_distance",
    "tree_loop",
    "tree_seq",
    "tree_union_b",
    "unfold",
]
