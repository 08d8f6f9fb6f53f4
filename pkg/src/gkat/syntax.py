"""GKAT expressions: hash-consed syntax trees, parsing, E(e), productivity, #(e).

Nodes are interned, so structural equality coincides with identity and
hashing is O(1).  All traversals are iterative; expressions with tens of
thousands of nodes are fine.
"""

from __future__ import annotations

import re
import threading
import weakref
from typing import Callable, Iterator, TypeVar

from gkat.bexp import AtomSet, BAnd, BExp, BNot, BOne, BOr, BTest, BZero, TestDecl, atomset_to_bexp, denote
from gkat.errors import DeclError, NameResolutionError, ParseError

REJECT = 0
ACCEPT = 1

_intern: "weakref.WeakValueDictionary[tuple, Exp]" = weakref.WeakValueDictionary()
_intern_lock = threading.Lock()


def _interned(cls, key: tuple, init: Callable[["Exp"], None]) -> "Exp":
    node = _intern.get(key)
    if node is not None:
        return node
    with _intern_lock:
        node = _intern.get(key)
        if node is None:
            node = object.__new__(cls)
            init(node)
            object.__setattr__(node, "_hash", hash(key))
            _intern[key] = node
    return node


class Exp:
    """Base class of expression nodes.  Construct through the subclasses."""

    __slots__ = ("decl", "_hash", "_row", "_E", "__weakref__")
    children: tuple = ()

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        raise TypeError("expressions are interned and cannot be pickled")

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"

    def __str__(self):
        return to_text(self)

    # convenience operators mirroring the algebra
    def __mul__(self, other: "Exp") -> "Exp":
        return Seq(self, other)

    @property
    def row(self) -> tuple:
        """Transition row indexed by atom: REJECT, ACCEPT or ``(action_index, derivative)``."""
        try:
            return self._row
        except AttributeError:
            _compute_rows(self)
            return self._row


def _set(node, **fields):
    for k, v in fields.items():
        object.__setattr__(node, k, v)


class Test(Exp):
    __slots__ = ("guard",)
    __test__ = False  # not a pytest class

    def __new__(cls, guard: AtomSet):
        if not isinstance(guard, AtomSet):
            raise TypeError("Test expects an AtomSet; use parse or denote for syntax")
        return _interned(cls, ("test", guard.decl, guard.bits), lambda n: _set(n, decl=guard.decl, guard=guard))


class Act(Exp):
    __slots__ = ("name", "index")

    def __new__(cls, decl: TestDecl, name: str):
        index = decl.action_index(name)
        return _interned(cls, ("act", decl, name), lambda n: _set(n, decl=decl, name=name, index=index))


def _same_decl(*nodes) -> TestDecl:
    decl = nodes[0].decl
    for n in nodes[1:]:
        if n.decl is not decl and n.decl != decl:
            raise DeclError("expressions over different declarations")
    return decl


class Seq(Exp):
    __slots__ = ("left", "right", "children")

    def __new__(cls, left: Exp, right: Exp):
        decl = _same_decl(left, right)
        return _interned(
            cls, ("seq", left, right), lambda n: _set(n, decl=decl, left=left, right=right, children=(left, right))
        )


class IfThenElse(Exp):
    """``left +_guard right``, i.e. ``if guard then left else right``."""

    __slots__ = ("guard", "left", "right", "children")

    def __new__(cls, guard: AtomSet, left: Exp, right: Exp):
        decl = _same_decl(left, right)
        if guard.decl != decl:
            raise DeclError("guard over a different declaration")
        return _interned(
            cls,
            ("if", guard.bits, left, right),
            lambda n: _set(n, decl=decl, guard=guard, left=left, right=right, children=(left, right)),
        )


class While(Exp):
    """``body^(guard)``, i.e. ``while guard do body``."""

    __slots__ = ("guard", "body", "children")

    def __new__(cls, guard: AtomSet, body: Exp):
        decl = body.decl
        if guard.decl != decl:
            raise DeclError("guard over a different declaration")
        return _interned(
            cls, ("while", guard.bits, body), lambda n: _set(n, decl=decl, guard=guard, body=body, children=(body,))
        )


def zero(decl: TestDecl) -> Exp:
    return Test(decl.no_atoms())


def one(decl: TestDecl) -> Exp:
    return Test(decl.all_atoms())


def guarded_sum(decl: TestDecl, branches: list[tuple[int, Exp]]) -> Exp:
    """Generalized guarded union over atoms, in the given (ascending) atom order.

    ``[(a1, e1), (a2, e2), ...]`` becomes ``e1 +_{a1} (e2 +_{a2} (... +_{ak} 0))``.
    """
    out = zero(decl)
    for a, e in reversed(branches):
        out = IfThenElse(decl.atom_set([a]), e, out)
    return out


# -- traversals --------------------------------------------------------------

T = TypeVar("T")


def postorder(e: Exp, skip: Callable[[Exp], bool] | None = None) -> Iterator[Exp]:
    """Distinct nodes of ``e``, children before parents.  Nodes for which ``skip``
    holds are treated as leaves and not yielded."""
    seen: set = set()
    stack = [e]
    while stack:
        n = stack[-1]
        if n in seen:
            stack.pop()
            continue
        pending = [c for c in n.children if c not in seen and not (skip and skip(c))]
        if pending:
            stack.extend(pending)
        else:
            seen.add(n)
            stack.pop()
            yield n


def fold(e: Exp, fn: Callable[..., T]) -> T:
    """Bottom-up evaluation ``fn(node, *child_results)``, computed once per distinct node."""
    memo: dict = {}
    for n in postorder(e):
        memo[n] = fn(n, *(memo[c] for c in n.children))
    return memo[e]


def node_count(e: Exp) -> int:
    """Number of AST nodes, counting shared subtrees with multiplicity."""
    return fold(e, lambda n, *cs: 1 + sum(cs))


def _termination_bits(n: Exp, *cs: int) -> int:
    if isinstance(n, Test):
        return n.guard.bits
    if isinstance(n, Act):
        return 0
    if isinstance(n, Seq):
        return cs[0] & cs[1]
    if isinstance(n, IfThenElse):
        g = n.guard.bits
        return (g & cs[0]) | (~g & cs[1] & ((1 << n.decl.num_atoms) - 1))
    if isinstance(n, While):
        return ~n.guard.bits & ((1 << n.decl.num_atoms) - 1)
    raise TypeError(n)


def termination_set(e: Exp) -> AtomSet:
    """E(e): the atoms on which ``e`` accepts immediately."""
    try:
        return e._E
    except AttributeError:
        pass
    for n in postorder(e, skip=lambda c: hasattr(c, "_E")):
        bits = _termination_bits(n, *(c._E.bits for c in n.children))
        object.__setattr__(n, "_E", AtomSet(n.decl, bits))
    return e._E


def is_productive(e: Exp) -> bool:
    return termination_set(e).is_empty()


def size_bound(e: Exp) -> int:
    """The local-finiteness bound #(e) on the number of reachable derivatives."""

    def step(n, *cs):
        if isinstance(n, Test):
            return 1
        if isinstance(n, Act):
            return 2
        if isinstance(n, While):
            return cs[0]
        return cs[0] + cs[1]

    return fold(e, step)


# -- derivatives ---------------------------------------------------------------


def _row_of(n: Exp) -> tuple:
    m = n.decl.num_atoms
    if isinstance(n, Test):
        g = n.guard.bits
        return tuple(ACCEPT if g >> a & 1 else REJECT for a in range(m))
    if isinstance(n, Act):
        return ((n.index, one(n.decl)),) * m
    if isinstance(n, Seq):
        rl, rr = n.left._row, n.right._row
        out = []
        for a in range(m):
            o = rl[a]
            if o is ACCEPT:
                out.append(rr[a])
            elif o is REJECT:
                out.append(REJECT)
            else:
                out.append((o[0], Seq(o[1], n.right)))
        return tuple(out)
    if isinstance(n, IfThenElse):
        g = n.guard.bits
        rl, rr = n.left._row, n.right._row
        return tuple(rl[a] if g >> a & 1 else rr[a] for a in range(m))
    if isinstance(n, While):
        g = n.guard.bits
        rb = n.body._row
        out = []
        for a in range(m):
            if not g >> a & 1:
                out.append(ACCEPT)
            else:
                o = rb[a]
                out.append((o[0], Seq(o[1], n)) if isinstance(o, tuple) else REJECT)
        return tuple(out)
    raise TypeError(n)


def _compute_rows(e: Exp) -> None:
    for n in postorder(e, skip=lambda c: hasattr(c, "_row")):
        object.__setattr__(n, "_row", _row_of(n))


# -- printing ----------------------------------------------------------------

_P_SEQ, _P_BRANCH = 1, 2


def _guard_text(g: AtomSet) -> str:
    return str(atomset_to_bexp(g))


def to_text(e: Exp) -> str:
    """Concrete syntax accepted by :func:`parse`."""

    def wrap(text_prec, need):
        text, prec = text_prec
        return f"({text})" if prec < need else text

    def step(n, *cs):
        if isinstance(n, Test):
            if n.guard.is_all():
                return "1", 3
            if n.guard.is_empty():
                return "0", 3
            return f"assert {_guard_text(n.guard)}", 3
        if isinstance(n, Act):
            return n.name, 3
        if isinstance(n, Seq):
            return f"{wrap(cs[0], _P_SEQ)}; {wrap(cs[1], _P_BRANCH)}", _P_SEQ
        if isinstance(n, IfThenElse):
            return (
                f"if {_guard_text(n.guard)} then {wrap(cs[0], _P_BRANCH)} else {wrap(cs[1], _P_BRANCH)}",
                _P_BRANCH,
            )
        if isinstance(n, While):
            return f"while {_guard_text(n.guard)} do {wrap(cs[0], _P_BRANCH)}", _P_BRANCH
        raise TypeError(n)

    return fold(e, step)[0]


# -- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+|\#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>[01])|(?P<op>[;.()!&|])"
)
KEYWORDS = {"if", "then", "else", "while", "do", "assert"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


class Lexer:
    def __init__(self, text: str, line: int = 1, col: int = 1):
        self.tokens: list[Token] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            s = m.group()
            kind = m.lastgroup
            if kind != "ws":
                if kind == "ident" and s in KEYWORDS:
                    kind = "kw"
                if kind == "num" and re.match(r"[A-Za-z0-9_]", text[m.end() : m.end() + 1]):
                    raise ParseError(f"malformed token starting {s!r}", line, col)
                self.tokens.append(Token(kind, s, line, col))
            nl = s.count("\n")
            if nl:
                line += nl
                col = len(s) - s.rfind("\n")
            else:
                col += len(s)
            pos = m.end()
        self.tokens.append(Token("eof", "", line, col))


class Parser:
    """Recursive-descent parser for the while-language surface syntax.

    ``seq ::= branch (";" branch)*``,
    ``branch ::= "if" b "then" branch "else" branch | "while" b "do" branch | primary``,
    ``primary ::= "0" | "1" | "assert" b | ident | "(" seq ")"``.
    ``.`` is accepted as a synonym for ``;``.
    """

    def __init__(self, lexer: Lexer, decl: TestDecl):
        self.toks = lexer.tokens
        self.i = 0
        self.decl = decl

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")

    def expect_end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # Boolean expressions
    def bexp(self) -> BExp:
        b = self._band()
        while self.accept("|"):
            b = BOr(b, self._band())
        return b

    def _band(self) -> BExp:
        b = self._bnot()
        while self.accept("&"):
            b = BAnd(b, self._bnot())
        return b

    def _bnot(self) -> BExp:
        if self.accept("!"):
            return BNot(self._bnot())
        t = self.tok
        if t.kind == "num":
            self.advance()
            return BOne() if t.text == "1" else BZero()
        if t.kind == "ident":
            self.advance()
            if self.decl.is_test(t.text):
                return BTest(t.text)
            if self.decl.is_action(t.text):
                raise NameResolutionError(f"{t.line}:{t.col}: action {t.text!r} used as a test")
            raise NameResolutionError(f"{t.line}:{t.col}: unknown test {t.text!r}")
        if self.accept("("):
            b = self.bexp()
            self.expect(")")
            return b
        raise self.error(f"expected a test, got {t.text or 'end of input'!r}")

    def guard(self) -> AtomSet:
        return denote(self.bexp(), self.decl)

    # programs
    def exp(self) -> Exp:
        e = self.branch()
        while self.accept(";") or self.accept("."):
            e = Seq(e, self.branch())
        return e

    def branch(self) -> Exp:
        if self.accept("if"):
            b = self.guard()
            self.expect("then")
            e = self.branch()
            self.expect("else")
            f = self.branch()
            return IfThenElse(b, e, f)
        if self.accept("while"):
            b = self.guard()
            self.expect("do")
            return While(b, self.branch())
        return self.primary()

    def primary(self) -> Exp:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return one(self.decl) if t.text == "1" else zero(self.decl)
        if self.accept("assert"):
            return Test(self.guard())
        if t.kind == "ident":
            self.advance()
            if self.decl.is_action(t.text):
                return Act(self.decl, t.text)
            if self.decl.is_test(t.text):
                raise NameResolutionError(f"{t.line}:{t.col}: test {t.text!r} used as a program; write 'assert {t.text}'")
            raise NameResolutionError(f"{t.line}:{t.col}: unknown action {t.text!r}")
        if self.accept("("):
            e = self.exp()
            self.expect(")")
            return e
        raise self.error(f"expected a program, got {t.text or 'end of input'!r}")


def parse(text: str, decl: TestDecl, line: int = 1, col: int = 1) -> Exp:
    p = Parser(Lexer(text, line, col), decl)
    e = p.exp()
    p.expect_end()
    return e


__all__ = [
    "ACCEPT",
    "REJECT",
    "Act",
    "Exp",
    "IfThenElse",
    "Seq",
    "Test",
    "While",
    "fold",
    "guarded_sum",
    "is_productive",
    "node_count",
    "one",
    "parse",
    "postorder",
    "size_bound",
    "termination_set",
    "to_text",
    "zero",
]
