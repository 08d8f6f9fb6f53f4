"""Command-line front end.

Exit codes: 0 success (or "equivalent", "passed", "well-nested"), 1 a
negative answer, 2 an error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from gkat import automaton as A
from gkat.bexp import TestDecl
from gkat.coequations import check_alternation
from gkat.equivalence import AXIOMS, Bisimulation, bisimilar, check_axiom_suite
from gkat.errors import GkatError
from gkat.session import load_session, parse_session
from gkat.trees import extract_salomaa, load_system, solve_salomaa, unfold
from gkat.wellnested import FIXTURE_NAMES, Leaf, fixtures, is_wellnested_bounded, render, replay

DEFAULT_MAX_DEPTH = 8


class CliError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_source(path: str):
    """Either ``("session", Session)`` or ``("automaton", Automaton)``."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        return "automaton", A.import_json(text)
    base = os.path.dirname(os.path.abspath(path)) if path != "-" else "."
    return "session", parse_session(text, base)


def _resolve(source, name: str | None):
    """The (automaton, state index) a name denotes in a source."""
    kind, obj = source
    if kind == "session":
        if name is None:
            if len(obj.definitions) != 1:
                raise CliError("the session has several definitions; name one")
            name = next(iter(obj.definitions))
        return obj.get(name).resolve()
    if name is None:
        if obj.start is None:
            raise CliError("the automaton has no start state; name one")
        return obj, obj.start
    return obj, obj.index(name)


def _outcome_json(o):
    return {"act": o.action, "to": o.target} if isinstance(o, A.Step) else o


def _outcome_text(o):
    return f"{o.action} -> {o.target}" if isinstance(o, A.Step) else o


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _depth(args) -> int:
    if args.depth < 1:
        raise CliError("--depth must be at least 1")
    if args.depth > args.max_depth:
        raise CliError(f"--depth {args.depth} exceeds --max-depth {args.max_depth}")
    return args.depth


# -- commands ------------------------------------------------------------------------


def cmd_equiv(args) -> int:
    source = _load_source(args.source)
    X, x = _resolve(source, args.name1)
    Y, y = _resolve(source, args.name2)
    if args.mode == "full":
        X, Y = A.normalize(X), A.normalize(Y)
    result = bisimilar(X, x, Y, y)
    payload = {"equivalent": result.equivalent, "mode": args.mode}
    if result.equivalent:
        assert isinstance(result.witness, Bisimulation)
        pairs = sorted(result.witness.pairs())
        payload["bisimulation"] = [list(p) for p in pairs]
        text = f"equivalent ({args.mode})\nbisimulation of {len(pairs)} pairs:\n"
        text += "".join(f"  {p} ~ {q}\n" for p, q in pairs)
    else:
        tr = result.witness
        labels = tr.labels(X.decl)
        payload["trace"] = labels
        payload["left"], payload["right"] = (_outcome_json(o) for o in tr.outcomes)
        text = (
            f"not equivalent ({args.mode})\n"
            f"counter-trace: {', '.join(labels)}\n"
            f"  {args.name1}: {_outcome_text(tr.outcomes[0])}\n"
            f"  {args.name2}: {_outcome_text(tr.outcomes[1])}\n"
        )
    _emit(args, payload, text)
    return 0 if result.equivalent else 1


def cmd_unfold(args) -> int:
    X, x = _resolve(_load_source(args.source), args.name)
    t = unfold(X, x, _depth(args))
    _emit(args, t.to_dict(), t.dump())
    return 0


def _export(args, X) -> None:
    fmt = "json" if args.json else args.format
    sys.stdout.write(A.export_dot(X) if fmt == "dot" else A.export_json(X) + "\n")


def cmd_automaton(args) -> int:
    X, x = _resolve(_load_source(args.source), args.name)
    _export(args, X.with_start(x))
    return 0


def cmd_normalize(args) -> int:
    X, x = _resolve(_load_source(args.source), args.name)
    _export(args, A.normalize(X).with_start(x))
    return 0


def cmd_check_nesting(args) -> int:
    X, x = _resolve(_load_source(args.source), args.name)
    report = check_alternation(X.with_start(x))
    _emit(args, report.to_dict(), report.text())
    return 0 if report.passed else 1


def _cert_json(cert):
    if isinstance(cert, Leaf):
        return {"discrete": list(cert.automaton.states)}
    decl = replay(cert.x).decl
    return {
        "x": _cert_json(cert.x),
        "y": _cert_json(cert.y),
        "h": {decl.atom_label(a): _outcome_json(o) for a, o in enumerate(cert.h)},
        "restored": [[s, decl.atom_label(a)] for s, a in cert.restored],
    }


def cmd_wellnested(args) -> int:
    X, _ = _resolve(_load_source(args.source), args.name)
    result = is_wellnested_bounded(X, args.max_states)
    payload = {"wellnested": result.wellnested, "certificate": _cert_json(result.cert) if result.cert else None}
    text = "well-nested\n" + render(result.cert) if result.wellnested else "not well-nested\n"
    _emit(args, payload, text)
    return 0 if result.wellnested else 1


def cmd_solve(args) -> int:
    text = _read(args.system)
    data = json.loads(text) if text.lstrip().startswith("{") else None
    if data is not None and "equations" not in data:
        system = extract_salomaa(A.from_dict(data))
    else:
        system = load_system(text)
    k = _depth(args)
    solution = solve_salomaa(system, k)
    payload = {"depth": k, "solution": {v: t.to_dict()["entries"] for v, t in zip(system.variables, solution)}}
    out = "".join(f"{v}:\n" + "".join(f"  {line}\n" for line in t.dump().splitlines()) for v, t in zip(system.variables, solution))
    _emit(args, payload, out)
    return 0


def cmd_fixtures(args) -> int:
    if args.fixture not in FIXTURE_NAMES:
        raise CliError(f"unknown fixture {args.fixture!r}; choose from {', '.join(FIXTURE_NAMES)}")
    _export(args, fixtures().get(args.fixture))
    return 0


def cmd_axioms(args) -> int:
    decl = TestDecl([f"t{i}" for i in range(args.tests)], ["p", "q", "r"])
    reports = check_axiom_suite(decl, args.samples, args.seed, args.ast_depth)
    payload = {r.name: {"checked": r.checked, "failures": len(r.failures)} for r in reports}
    text = "".join(f"{r.name}: {'pass' if r.passed else 'FAIL'} ({r.checked - len(r.failures)}/{r.checked})\n" for r in reports)
    _emit(args, payload, text)
    return 0 if all(r.passed for r in reports) else 1


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkat", description="Decide, unfold and analyse GKAT programs and automata.")
    parser.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, help="upper bound for --depth (default 8)")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(fn=fn)
        return p

    def source(p, names="?"):
        p.add_argument("source", help="session file or automaton JSON ('-' for stdin)")
        if names:
            p.add_argument("name", nargs=names, help="definition (session) or state (automaton)")

    p = command("equiv", cmd_equiv, "decide equivalence of two definitions or states")
    source(p, names=None)
    p.add_argument("name1")
    p.add_argument("name2")
    p.add_argument("--mode", choices=["full", "no-early-termination"], default="full")

    p = command("unfold", cmd_unfold, "print the behaviour tree to a depth")
    source(p)
    p.add_argument("--depth", type=int, required=True)

    for name, fn, help in (
        ("automaton", cmd_automaton, "print the automaton"),
        ("normalize", cmd_normalize, "print the automaton with steps into dead states removed"),
    ):
        p = command(name, fn, help)
        source(p)
        p.add_argument("--format", choices=["json", "dot"], default="json")

    p = command("check-nesting", cmd_check_nesting, "look for alternating accept sets on a cycle")
    source(p)

    p = command("wellnested", cmd_wellnested, "search for a well-nested derivation")
    source(p)
    p.add_argument("--max-states", type=int, default=10)

    p = command("solve", cmd_solve, "solve an equation system (or an automaton's) to a depth")
    p.add_argument("system", help="system JSON or automaton JSON ('-' for stdin)")
    p.add_argument("--depth", type=int, required=True)

    p = command("fixtures", cmd_fixtures, "print a built-in example automaton")
    p.add_argument("fixture", metavar="NAME", help=", ".join(FIXTURE_NAMES))
    p.add_argument("--format", choices=["json", "dot"], default="json")

    p = command("axioms", cmd_axioms, "check random instances of every axiom")
    p.add_argument("--tests", type=int, default=2)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ast-depth", type=int, default=5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (GkatError, CliError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"gkat: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
