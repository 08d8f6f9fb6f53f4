"""Session files: a declaration header followed by named definitions.

::

    tests: t1, t2; actions: p, q;
    # comments run to the end of the line
    loop = while t1 do p
    body = if t2 then p else q;
           q
    saved = @automaton "saved.json"

A definition runs until the next line that starts with ``name =``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from gkat.automaton import Automaton, brzozowski, import_json
from gkat.bexp import TestDecl
from gkat.errors import GkatError, NameResolutionError, ParseError
from gkat.syntax import Exp, parse

_HEADER = re.compile(
    r"\s*tests\s*:\s*(?P<tests>[^;]*);\s*actions\s*:\s*(?P<actions>[^;]*);",
)
_DEF = re.compile(r"^[ \t]*(?P<name>[A-Za-z_][A-Za-z0-9_]*)[ \t]*=(?!=)", re.M)
_AUTOMATON_REF = re.compile(r'\s*@automaton\s+"(?P<path>[^"]*)"\s*\Z')


def _strip_comments(text: str) -> str:
    return re.sub(r"#[^\n]*", lambda m: " " * len(m.group()), text)


def _names(raw: str) -> list[str]:
    return [s.strip() for s in raw.split(",") if s.strip()]


@dataclass
class Definition:
    name: str
    exp: Exp | None = None
    automaton: Automaton | None = None

    def resolve(self) -> tuple[Automaton, int]:
        """The automaton and state this definition denotes."""
        if self.exp is not None:
            return brzozowski(self.exp), 0
        assert self.automaton is not None
        return self.automaton, self.automaton.start if self.automaton.start is not None else 0


@dataclass
class Session:
    decl: TestDecl
    definitions: dict = field(default_factory=dict)

    def get(self, name: str) -> Definition:
        try:
            return self.definitions[name]
        except KeyError:
            known = ", ".join(self.definitions) or "none"
            raise NameResolutionError(f"no definition named {name!r} (defined: {known})") from None


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_session(text: str, base_dir: str = ".") -> Session:
    clean = _strip_comments(text)
    m = _HEADER.match(clean)
    if m is None:
        line, col = _position(clean, len(clean) - len(clean.lstrip()))
        raise ParseError("expected header 'tests: ...; actions: ...;'", line, col)
    decl = TestDecl(_names(m.group("tests")), _names(m.group("actions")))
    session = Session(decl)
    starts = list(_DEF.finditer(clean, m.end()))
    gap = clean[m.end() : starts[0].start() if starts else len(clean)]
    if gap.strip():
        line, col = _position(clean, m.end() + len(gap) - len(gap.lstrip()))
        raise ParseError("expected a definition 'name = ...'", line, col)
    for i, d in enumerate(starts):
        name = d.group("name")
        if name in session.definitions:
            line, col = _position(clean, d.start("name"))
            raise ParseError(f"duplicate definition {name!r}", line, col)
        body_start = d.end()
        body_end = starts[i + 1].start() if i + 1 < len(starts) else len(clean)
        body = clean[body_start:body_end]
        ref = _AUTOMATON_REF.match(body)
        if ref:
            path = os.path.join(base_dir, ref.group("path"))
            try:
                with open(path, encoding="utf-8") as fh:
                    X = import_json(fh.read(), decl)
            except OSError as exc:
                raise GkatError(f"cannot read automaton for {name!r}: {exc}") from None
            session.definitions[name] = Definition(name, automaton=X)
            continue
        line, col = _position(clean, body_start)
        session.definitions[name] = Definition(name, exp=parse(body, decl, line, col))
    return session


def load_session(path: str) -> Session:
    with open(path, encoding="utf-8") as fh:
        return parse_session(fh.read(), os.path.dirname(os.path.abspath(path)))
