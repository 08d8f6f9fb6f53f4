"""Boolean tests over a declared finite set of primitive tests.

Atoms are total truth assignments, encoded as integers: bit ``j`` of an atom
is the truth value of ``decl.tests[j]``.  An :class:`AtomSet` is a bit-set of
width ``2 ** len(decl.tests)`` stored in a Python int.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from gkat.errors import DeclError, NameResolutionError

DEFAULT_MAX_TESTS = 10
MAX_TESTS_ENV = "GKAT_MAX_TESTS"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
RESERVED = frozenset({"if", "then", "else", "while", "do", "assert", "tests", "actions"})


def _default_cap() -> int:
    raw = os.environ.get(MAX_TESTS_ENV)
    if raw is None:
        return DEFAULT_MAX_TESTS
    try:
        return int(raw)
    except ValueError:
        raise DeclError(f"{MAX_TESTS_ENV} must be an integer, got {raw!r}") from None


class TestDecl:
    """The two-sorted alphabet: primitive tests and actions, in declared order."""

    __slots__ = ("tests", "actions", "_test_index", "_action_index", "_hash")
    __test__ = False  # not a pytest class

    def __init__(self, tests: Sequence[str], actions: Sequence[str], max_tests: int | None = None):
        tests = tuple(tests)
        actions = tuple(actions)
        cap = _default_cap() if max_tests is None else max_tests
        for name in tests + actions:
            if not isinstance(name, str) or not _IDENT.match(name) or name in RESERVED:
                raise DeclError(f"invalid identifier {name!r}")
        if len(set(tests)) != len(tests):
            raise DeclError("duplicate test name")
        if len(set(actions)) != len(actions):
            raise DeclError("duplicate action name")
        both = set(tests) & set(actions)
        if both:
            raise DeclError(f"identifier declared as both test and action: {sorted(both)[0]}")
        if len(tests) > cap:
            raise DeclError(
                f"{len(tests)} tests exceed the cap of {cap} "
                f"({2 ** len(tests)} atoms); raise {MAX_TESTS_ENV} to allow more"
            )
        object.__setattr__(self, "tests", tests)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "_test_index", {t: i for i, t in enumerate(tests)})
        object.__setattr__(self, "_action_index", {p: i for i, p in enumerate(actions)})
        object.__setattr__(self, "_hash", hash((tests, actions)))

    def __setattr__(self, name, value):
        raise AttributeError("TestDecl is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, TestDecl):
            return NotImplemented
        return self.tests == other.tests and self.actions == other.actions

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"TestDecl(tests={list(self.tests)}, actions={list(self.actions)})"

    @property
    def num_atoms(self) -> int:
        return 1 << len(self.tests)

    @property
    def atoms(self) -> range:
        return range(self.num_atoms)

    def test_index(self, name: str) -> int:
        try:
            return self._test_index[name]
        except KeyError:
            raise NameResolutionError(f"unknown test {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self._action_index[name]
        except KeyError:
            raise NameResolutionError(f"unknown action {name!r}") from None

    def is_test(self, name: str) -> bool:
        return name in self._test_index

    def is_action(self, name: str) -> bool:
        return name in self._action_index

    def atom_label(self, atom: int) -> str:
        """Canonical label, e.g. ``t1!t2`` for t1 true and t2 false; ``1`` when T is empty."""
        if not self.tests:
            return "1"
        return "".join(t if atom >> j & 1 else "!" + t for j, t in enumerate(self.tests))

    def parse_atom(self, label: str) -> int:
        if not self.tests:
            if label in ("1", ""):
                return 0
            raise NameResolutionError(f"unknown atom {label!r}")
        pos = 0
        atom = 0
        for j, t in enumerate(self.tests):
            neg = label.startswith("!", pos)
            if neg:
                pos += 1
            if not label.startswith(t, pos):
                raise NameResolutionError(f"unknown atom {label!r}")
            pos += len(t)
            if not neg:
                atom |= 1 << j
        if pos != len(label):
            raise NameResolutionError(f"unknown atom {label!r}")
        return atom

    def all_atoms(self) -> "AtomSet":
        return AtomSet(self, (1 << self.num_atoms) - 1)

    def no_atoms(self) -> "AtomSet":
        return AtomSet(self, 0)

    def atom_set(self, atoms) -> "AtomSet":
        bits = 0
        for a in atoms:
            if not 0 <= a < self.num_atoms:
                raise ValueError(f"atom {a} out of range")
            bits |= 1 << a
        return AtomSet(self, bits)


@dataclass(frozen=True)
class AtomSet:
    """A subset of the atoms of ``decl``."""

    decl: TestDecl
    bits: int

    def _check(self, other: "AtomSet") -> None:
        if not isinstance(other, AtomSet):
            raise TypeError(f"expected AtomSet, got {type(other).__name__}")
        if other.decl is not self.decl and other.decl != self.decl:
            raise DeclError("atom sets over different test declarations")

    def complement(self) -> "AtomSet":
        return AtomSet(self.decl, ~self.bits & ((1 << self.decl.num_atoms) - 1))

    def intersect(self, other: "AtomSet") -> "AtomSet":
        self._check(other)
        return AtomSet(self.decl, self.bits & other.bits)

    def union(self, other: "AtomSet") -> "AtomSet":
        self._check(other)
        return AtomSet(self.decl, self.bits | other.bits)

    __invert__ = complement
    __and__ = intersect
    __or__ = union

    def is_empty(self) -> bool:
        return self.bits == 0

    def is_all(self) -> bool:
        return self.bits == (1 << self.decl.num_atoms) - 1

    def __contains__(self, atom: int) -> bool:
        return bool(self.bits >> atom & 1)

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        a = 0
        while bits:
            if bits & 1:
                yield a
            bits >>= 1
            a += 1

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def labels(self) -> list[str]:
        return [self.decl.atom_label(a) for a in self]

    def __repr__(self):
        return "{" + ", ".join(self.labels()) + "}"


# -- syntax -----------------------------------------------------------------


class BExp:
    """Boolean expression syntax node."""

    __slots__ = ()


@dataclass(frozen=True)
class BZero(BExp):
    def __str__(self):
        return "0"


@dataclass(frozen=True)
class BOne(BExp):
    def __str__(self):
        return "1"


@dataclass(frozen=True)
class BTest(BExp):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BNot(BExp):
    arg: BExp

    def __str__(self):
        return f"!{_wrap(self.arg, 3)}"


@dataclass(frozen=True)
class BAnd(BExp):
    left: BExp
    right: BExp

    def __str__(self):
        return f"{_wrap(self.left, 2)} & {_wrap(self.right, 3)}"


@dataclass(frozen=True)
class BOr(BExp):
    left: BExp
    right: BExp

    def __str__(self):
        return f"{_wrap(self.left, 1)} | {_wrap(self.right, 2)}"


def _prec(b: BExp) -> int:
    if isinstance(b, BOr):
        return 1
    if isinstance(b, BAnd):
        return 2
    return 3


def _wrap(b: BExp, need: int) -> str:
    s = str(b)
    return f"({s})" if _prec(b) < need else s


def eval_bexp(b: BExp, atom: int, decl: TestDecl) -> bool:
    """Truth-table evaluation of ``b`` at a single atom."""
    if isinstance(b, BZero):
        return False
    if isinstance(b, BOne):
        return True
    if isinstance(b, BTest):
        return bool(atom >> decl.test_index(b.name) & 1)
    if isinstance(b, BNot):
        return not eval_bexp(b.arg, atom, decl)
    if isinstance(b, BAnd):
        return eval_bexp(b.left, atom, decl) and eval_bexp(b.right, atom, decl)
    if isinstance(b, BOr):
        return eval_bexp(b.left, atom, decl) or eval_bexp(b.right, atom, decl)
    raise TypeError(f"not a Boolean expression: {b!r}")


def _test_mask(decl: TestDecl, j: int) -> int:
    bits = 0
    for a in decl.atoms:
        if a >> j & 1:
            bits |= 1 << a
    return bits


def denote(b: BExp, decl: TestDecl) -> AtomSet:
    """The set of atoms satisfying ``b``."""
    if isinstance(b, BZero):
        return decl.no_atoms()
    if isinstance(b, BOne):
        return decl.all_atoms()
    if isinstance(b, BTest):
        return AtomSet(decl, _test_mask(decl, decl.test_index(b.name)))
    if isinstance(b, BNot):
        return denote(b.arg, decl).complement()
    if isinstance(b, BAnd):
        return denote(b.left, decl) & denote(b.right, decl)
    if isinstance(b, BOr):
        return denote(b.left, decl) | denote(b.right, decl)
    raise TypeError(f"not a Boolean expression: {b!r}")


def atomset_to_bexp(s: AtomSet) -> BExp:
    """A Boolean expression denoting ``s``: a literal when possible, else a disjunction of atoms."""
    decl = s.decl
    if s.is_empty():
        return BZero()
    if s.is_all():
        return BOne()
    for j, t in enumerate(decl.tests):
        mask = _test_mask(decl, j)
        if s.bits == mask:
            return BTest(t)
        if s.bits == ~mask & ((1 << decl.num_atoms) - 1):
            return BNot(BTest(t))
    out: BExp | None = None
    for a in s:
        term: BExp | None = None
        for j, t in enumerate(decl.tests):
            lit: BExp = BTest(t) if a >> j & 1 else BNot(BTest(t))
            term = lit if term is None else BAnd(term, lit)
        out = term if out is None else BOr(out, term)
    assert out is not None
    return out


# -- parsing ----------------------------------------------------------------

def parse_bexp(text: str, decl: TestDecl) -> BExp:
    """Parse ``b ::= 0 | 1 | ident | !b | b & b | b | b | (b)``."""
    from gkat.syntax import Lexer, Parser

    parser = Parser(Lexer(text), decl)
    b = parser.bexp()
    parser.expect_end()
    return b


__all__ = [
    "AtomSet",
    "BAnd",
    "BExp",
    "BNot",
    "BOne",
    "BOr",
    "BTest",
    "BZero",
    "TestDecl",
    "atomset_to_bexp",
    "denote",
    "eval_bexp",
    "parse_bexp",
]
