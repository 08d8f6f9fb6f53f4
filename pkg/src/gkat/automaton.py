"""Finite GKAT-automata: construction from expressions, combinators, normalization, I/O.

Transitions are stored densely: for ``n`` states and ``m`` atoms there are
three read-only ``n x m`` arrays ``kind``/``act``/``tgt`` (see
:mod:`gkat._kernels`).  At the API boundary an outcome is ``"reject"``,
``"accept"`` or ``Step(action, target_state_id)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from gkat import _kernels as K
from gkat.bexp import AtomSet, TestDecl, atomset_to_bexp
from gkat.errors import AutomatonError, DeclError, NameResolutionError
from gkat.syntax import Act, Exp, IfThenElse, Seq, guarded_sum, one, termination_set

REJECT = "reject"
ACCEPT = "accept"


class Step(NamedTuple):
    action: str
    target: str


Outcome = Union[str, Step]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Automaton:
    decl: TestDecl
    states: tuple
    kind: np.ndarray
    act: np.ndarray
    tgt: np.ndarray
    start: int | None = None
    expressions: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        n, m = len(self.states), self.decl.num_atoms
        kind = np.asarray(self.kind, dtype=np.int8).reshape(n, m)
        act = np.asarray(self.act, dtype=np.int32).reshape(n, m)
        tgt = np.asarray(self.tgt, dtype=np.int32).reshape(n, m)
        if len(set(self.states)) != n:
            raise AutomatonError("duplicate state id")
        if np.any((kind < 0) | (kind > 2)):
            raise AutomatonError("invalid outcome kind")
        step = kind == K.STEP
        if np.any(step & ((tgt < 0) | (tgt >= n))):
            raise AutomatonError("step target outside the automaton")
        if np.any(step & ((act < 0) | (act >= len(self.decl.actions)))):
            raise AutomatonError("undeclared action")
        # non-step entries are normalized so equality is on meaning only
        act = np.where(step, act, -1).astype(np.int32)
        tgt = np.where(step, tgt, -1).astype(np.int32)
        if self.start is not None and not 0 <= self.start < n:
            raise AutomatonError("start state outside the automaton")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "kind", _frozen(kind))
        object.__setattr__(self, "act", _frozen(act))
        object.__setattr__(self, "tgt", _frozen(tgt))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    # -- basic queries ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other):
        if not isinstance(other, Automaton):
            return NotImplemented
        return (
            self.decl == other.decl
            and self.states == other.states
            and self.start == other.start
            and np.array_equal(self.kind, other.kind)
            and np.array_equal(self.act, other.act)
            and np.array_equal(self.tgt, other.tgt)
        )

    __hash__ = None

    def index(self, state) -> int:
        """Position of a state given by id or index."""
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if not 0 <= state < len(self.states):
                raise NameResolutionError(f"no state with index {state}")
            return int(state)
        try:
            return self._index[state]
        except KeyError:
            raise NameResolutionError(f"unknown state {state!r}") from None

    @property
    def start_id(self):
        return None if self.start is None else self.states[self.start]

    def outcome(self, state, atom: int) -> Outcome:
        i = self.index(state)
        k = self.kind[i, atom]
        if k == K.ACCEPT:
            return ACCEPT
        if k == K.REJECT:
            return REJECT
        return Step(self.decl.actions[self.act[i, atom]], self.states[self.tgt[i, atom]])

    def row(self, state) -> list:
        return [self.outcome(state, a) for a in self.decl.atoms]

    def accept_set(self, state) -> AtomSet:
        i = self.index(state)
        return self.decl.atom_set(np.nonzero(self.kind[i] == K.ACCEPT)[0].tolist())

    def successors(self, state) -> set:
        i = self.index(state)
        return set(self.tgt[i][self.kind[i] == K.STEP].tolist())

    def has_steps(self) -> bool:
        return bool(np.any(self.kind == K.STEP))

    def reachable(self, state=None) -> list[int]:
        """Indices reachable from ``state`` (default: the start) in BFS order."""
        root = self.start if state is None else self.index(state)
        if root is None:
            return list(range(len(self)))
        seen = {root}
        order = [root]
        i = 0
        while i < len(order):
            s = order[i]
            i += 1
            for a in range(self.decl.num_atoms):
                if self.kind[s, a] == K.STEP:
                    t = int(self.tgt[s, a])
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
        return order

    def with_start(self, state) -> "Automaton":
        return Automaton(self.decl, self.states, self.kind, self.act, self.tgt, self.index(state), self.expressions)

    def __repr__(self):
        return f"<Automaton {len(self)} states, start={self.start_id!r}>"


# -- construction ----------------------------------------------------------------


def _encode(decl: TestDecl, index: Mapping, outcome) -> tuple[int, int, int]:
    if outcome == ACCEPT:
        return K.ACCEPT, -1, -1
    if outcome == REJECT or outcome is None:
        return K.REJECT, -1, -1
    action, target = outcome
    if target not in index:
        raise AutomatonError(f"step to unknown state {target!r}")
    return K.STEP, decl.action_index(action), index[target]


def from_table(decl: TestDecl, states: Sequence, table: Mapping, start=None) -> Automaton:
    """Build from ``{state: {atom: outcome}}``; missing entries reject."""
    states = tuple(states)
    index = {s: i for i, s in enumerate(states)}
    n, m = len(states), decl.num_atoms
    kind = np.zeros((n, m), np.int8)
    act = np.full((n, m), -1, np.int32)
    tgt = np.full((n, m), -1, np.int32)
    for s, row in table.items():
        if s not in index:
            raise AutomatonError(f"unknown state {s!r}")
        for a, o in row.items():
            kind[index[s], a], act[index[s], a], tgt[index[s], a] = _encode(decl, index, o)
    st = None if start is None else index.get(start)
    if start is not None and st is None:
        raise AutomatonError(f"unknown start state {start!r}")
    return Automaton(decl, states, kind, act, tgt, st)


def brzozowski(e: Exp) -> Automaton:
    """The derivative automaton of ``e``: states are the reachable derivatives, ``x0`` is ``e``."""
    decl = e.decl
    m = decl.num_atoms
    index = {e: 0}
    order = [e]
    rows = []
    i = 0
    while i < len(order):
        row = order[i].row
        rows.append(row)
        for o in row:
            if type(o) is tuple and o[1] not in index:
                index[o[1]] = len(order)
                order.append(o[1])
        i += 1
    n = len(order)
    kind = np.zeros((n, m), np.int8)
    act = np.full((n, m), -1, np.int32)
    tgt = np.full((n, m), -1, np.int32)
    for s, row in enumerate(rows):
        for a, o in enumerate(row):
            if type(o) is tuple:
                kind[s, a] = K.STEP
                act[s, a] = o[0]
                tgt[s, a] = index[o[1]]
            else:
                kind[s, a] = o
    return Automaton(decl, tuple(f"x{j}" for j in range(n)), kind, act, tgt, 0, tuple(order))


def reconstruct(e: Exp) -> Exp:
    """``1 +_{E(e)} D(e)`` where ``D(e)`` is the guarded sum of ``p_a . e_a`` over the steps of ``e``."""
    decl = e.decl
    branches = [(a, Seq(Act(decl, decl.actions[o[0]]), o[1])) for a, o in enumerate(e.row) if type(o) is tuple]
    return IfThenElse(termination_set(e), one(decl), guarded_sum(decl, branches))


# -- combinators -------------------------------------------------------------------


def _same_decl(X: Automaton, Y: Automaton) -> None:
    if X.decl != Y.decl:
        raise DeclError("automata over different declarations")


def coproduct(X: Automaton, Y: Automaton, tags: tuple[str, str] | None = ("0:", "1:")) -> Automaton:
    """Disjoint union; with ``tags=None`` state ids are kept and must not clash.  Start is X's."""
    _same_decl(X, Y)
    if tags is None:
        states = X.states + Y.states
        if len(set(states)) != len(states):
            raise AutomatonError("state ids clash; pass tags")
    else:
        states = tuple(f"{tags[0]}{s}" for s in X.states) + tuple(f"{tags[1]}{s}" for s in Y.states)
    n = len(X)
    ytgt = np.where(Y.kind == K.STEP, Y.tgt + n, -1)
    return Automaton(
        X.decl,
        states,
        np.vstack([X.kind, Y.kind]),
        np.vstack([X.act, Y.act]),
        np.vstack([X.tgt, ytgt]),
        X.start,
    )


def subautomaton(X: Automaton, states: Iterable, start=None) -> Automaton:
    """Restriction to a transition-closed set of states (kept in X's order)."""
    keep = sorted({X.index(s) for s in states})
    pos = {s: i for i, s in enumerate(keep)}
    for s in keep:
        for t in X.successors(s):
            if t not in pos:
                raise AutomatonError(f"state set is not closed: {X.states[s]} steps to {X.states[t]}")
    remap = np.full(len(X) + 1, -1, np.int64)
    for s, i in pos.items():
        remap[s] = i
    sub = np.array(keep, dtype=np.int64)
    tgt = remap[X.tgt[sub]]  # -1 maps to remap[-1] == -1
    st = None if start is None else pos[X.index(start)]
    return Automaton(X.decl, tuple(X.states[s] for s in keep), X.kind[sub], X.act[sub], tgt, st)


def uniform_continuation(X: Automaton, U: Iterable, h: Sequence[Outcome]) -> Automaton:
    """``X[U, h]``: accepting entries of states in ``U`` are replaced by ``h`` atom-wise."""
    decl = X.decl
    if len(h) != decl.num_atoms:
        raise AutomatonError("continuation must give one outcome per atom")
    enc = [_encode(decl, X._index, o) for o in h]
    kind, act, tgt = X.kind.copy(), X.act.copy(), X.tgt.copy()
    for u in {X.index(s) for s in U}:
        for a, (k, p, t) in enumerate(enc):
            if kind[u, a] == K.ACCEPT:
                kind[u, a], act[u, a], tgt[u, a] = k, p, t
    return Automaton(decl, X.states, kind, act, tgt, X.start)


def _fresh(X: Automaton, name: str) -> str:
    while name in X._index:
        name += "'"
    return name


def guarded_union(X: Automaton, x, Y: Automaton, y, b: AtomSet, name: str = "u") -> Automaton:
    """A fresh start state behaving like ``x`` on ``b`` and like ``y`` elsewhere."""
    Z = coproduct(X, Y)
    rx, ry = Z.row("0:" + X.states[X.index(x)]), Z.row("1:" + Y.states[Y.index(y)])
    return _add_state(Z, _fresh(Z, name), [rx[a] if a in b else ry[a] for a in X.decl.atoms])


def _add_state(Z: Automaton, name: str, row: list) -> Automaton:
    states = Z.states + (name,)
    pad = Automaton(
        Z.decl,
        states,
        np.vstack([Z.kind, np.zeros((1, Z.decl.num_atoms), np.int8)]),
        np.vstack([Z.act, np.full((1, Z.decl.num_atoms), -1, np.int32)]),
        np.vstack([Z.tgt, np.full((1, Z.decl.num_atoms), -1, np.int32)]),
        len(Z),
    )
    return _set_row(pad, name, row)


def _set_row(X: Automaton, state, row: list) -> Automaton:
    i = X.index(state)
    kind, act, tgt = X.kind.copy(), X.act.copy(), X.tgt.copy()
    for a, o in enumerate(row):
        kind[i, a], act[i, a], tgt[i, a] = _encode(X.decl, X._index, o)
    return Automaton(X.decl, X.states, kind, act, tgt, X.start)


def sequence(X: Automaton, x, Y: Automaton, y) -> Automaton:
    """States for ``x . y``: X's accepting entries continue as ``y`` does.  Start is ``x``."""
    Z = coproduct(X, Y)
    yid = "1:" + Y.states[Y.index(y)]
    Z = uniform_continuation(Z, ["0:" + s for s in X.states], Z.row(yid))
    return Z.with_start("0:" + X.states[X.index(x)])


def guarded_loop(X: Automaton, x, b: AtomSet, name: str = "w") -> Automaton:
    """States for ``x^(b)`` with a fresh loop head as start."""
    head = _fresh(X, name)
    rx = X.row(x)
    Z = _add_state(X, head, [ACCEPT] * X.decl.num_atoms)
    row = [ACCEPT if a not in b else (rx[a] if isinstance(rx[a], Step) else REJECT) for a in X.decl.atoms]
    Z = _set_row(Z, head, row)
    return uniform_continuation(Z, X.states, row).with_start(head)


def continuation(X: Automaton, x, Y: Automaton, y) -> Automaton:
    """States for ``x |> y``: Y restarts at ``y`` whenever it accepts, and X's accepts continue into that."""
    yid = Y.states[Y.index(y)]
    C = uniform_continuation(Y, Y.states, Y.row(yid))
    return sequence(X, x, C, yid)


def discrete(decl: TestDecl, accepts: Iterable[AtomSet], names: Sequence[str] | None = None) -> Automaton:
    """An automaton without steps; state ``i`` accepts ``accepts[i]`` and rejects elsewhere."""
    accepts = list(accepts)
    names = tuple(names) if names is not None else tuple(f"d{i}" for i in range(len(accepts)))
    kind = np.zeros((len(accepts), decl.num_atoms), np.int8)
    for i, b in enumerate(accepts):
        for a in b:
            kind[i, a] = K.ACCEPT
    minus = np.full(kind.shape, -1, np.int32)
    return Automaton(decl, names, kind, minus, minus, 0 if accepts else None)


# -- quotients and normalization -------------------------------------------------------


def _build_quotient(X: Automaton, cls: np.ndarray) -> tuple[Automaton, dict]:
    ncls = int(cls.max()) + 1 if len(cls) else 0
    reps = np.full(ncls, -1, np.int64)
    for s in range(len(X) - 1, -1, -1):
        reps[cls[s]] = s
    tgt = np.where(X.kind[reps] == K.STEP, cls[np.where(X.tgt[reps] >= 0, X.tgt[reps], 0)], -1)
    Q = Automaton(
        X.decl,
        tuple(X.states[r] for r in reps),
        X.kind[reps],
        X.act[reps],
        tgt,
        None if X.start is None else int(cls[X.start]),
    )
    mapping = {X.states[s]: Q.states[cls[s]] for s in range(len(X))}
    if not is_homomorphism(X, Q, mapping):
        raise AutomatonError("identification is not compatible with the transitions")
    return Q, mapping


def quotient_by_bisimilarity(X: Automaton) -> tuple[Automaton, dict]:
    """Collapse bisimilar states; returns the quotient and the quotient map on state ids.

    Classes are named after their first member.
    """
    cls = K.refine(X.kind, X.act, X.tgt)
    return _build_quotient(X, cls)


def quotient(X: Automaton, pairs: Iterable[tuple]) -> tuple[Automaton, dict]:
    """Quotient by the least congruence identifying ``pairs``; fails if the pairs are not bisimilar."""
    n = len(X)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    queue = [(X.index(a), X.index(b)) for a, b in pairs]
    while queue:
        u, v = queue.pop()
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        parent[max(ru, rv)] = min(ru, rv)
        for a in X.decl.atoms:
            if X.kind[u, a] != X.kind[v, a] or X.act[u, a] != X.act[v, a]:
                raise AutomatonError(f"{X.states[u]} and {X.states[v]} are not bisimilar")
            if X.kind[u, a] == K.STEP:
                queue.append((int(X.tgt[u, a]), int(X.tgt[v, a])))
    roots = np.array([find(i) for i in range(n)])
    _, first, inv = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(first), np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return _build_quotient(X, rank[inv.reshape(-1)])


def is_homomorphism(X: Automaton, Y: Automaton, mapping: Mapping) -> bool:
    """Whether the state map commutes with the transition structures."""
    if X.decl != Y.decl:
        return False
    for s in X.states:
        ys = mapping[s]
        for a in X.decl.atoms:
            ox, oy = X.outcome(s, a), Y.outcome(ys, a)
            if isinstance(ox, Step):
                if not isinstance(oy, Step) or ox.action != oy.action or mapping[ox.target] != oy.target:
                    return False
            elif ox != oy:
                return False
    return True


def dead_states(X: Automaton) -> np.ndarray:
    """Boolean mask of states that cannot reach an accepting entry."""
    return ~K.live_states(X.kind, X.tgt.astype(np.int64))


def normalize(X: Automaton) -> Automaton:
    """Steps into dead states become rejects."""
    dead = dead_states(X)
    into_dead = (X.kind == K.STEP) & dead[np.where(X.tgt >= 0, X.tgt, 0)]
    kind = np.where(into_dead, K.REJECT, X.kind)
    return Automaton(X.decl, X.states, kind, X.act, X.tgt, X.start, X.expressions)


# -- serialization ------------------------------------------------------------------------


def _json_outcome(o: Outcome):
    if isinstance(o, Step):
        return {"act": o.action, "to": o.target}
    return o


def to_dict(X: Automaton) -> dict:
    delta = {}
    for s in X.states:
        entries = {}
        for a in X.decl.atoms:
            o = X.outcome(s, a)
            if o != REJECT:
                entries[X.decl.atom_label(a)] = _json_outcome(o)
        delta[s] = entries
    return {
        "tests": list(X.decl.tests),
        "actions": list(X.decl.actions),
        "states": list(X.states),
        "start": X.start_id,
        "delta": delta,
    }


def export_json(X: Automaton) -> str:
    return json.dumps(to_dict(X), indent=2)


def from_dict(data, decl: TestDecl | None = None) -> Automaton:
    if not isinstance(data, dict):
        raise AutomatonError("automaton JSON must be an object")
    for key in ("states", "delta"):
        if key not in data:
            raise AutomatonError(f"missing field {key!r}")
    if decl is None:
        if "tests" not in data or "actions" not in data:
            raise AutomatonError("missing field 'tests' or 'actions'")
        decl = TestDecl(data["tests"], data["actions"])
    elif list(data.get("tests", decl.tests)) != list(decl.tests) or list(data.get("actions", decl.actions)) != list(
        decl.actions
    ):
        raise AutomatonError("automaton declares different tests or actions")
    states = data["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise AutomatonError("'states' must be a list of strings")
    delta = data["delta"]
    if not isinstance(delta, dict):
        raise AutomatonError("'delta' must be an object")
    table = {}
    for s, row in delta.items():
        if s not in states:
            raise AutomatonError(f"unknown state {s!r} in delta")
        if not isinstance(row, dict):
            raise AutomatonError(f"delta for {s!r} must be an object")
        out = {}
        for label, o in row.items():
            a = decl.parse_atom(label)
            if o in (ACCEPT, REJECT):
                out[a] = o
            elif isinstance(o, dict) and set(o) == {"act", "to"}:
                if not decl.is_action(o["act"]):
                    raise NameResolutionError(f"unknown action {o['act']!r}")
                if o["to"] not in states:
                    raise AutomatonError(f"step to unknown state {o['to']!r}")
                out[a] = Step(o["act"], o["to"])
            else:
                raise AutomatonError(f"bad outcome {o!r} for {s!r} on {label!r}")
        table[s] = out
    return from_table(decl, states, table, data.get("start"))


def import_json(text: str, decl: TestDecl | None = None) -> Automaton:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AutomatonError(f"invalid JSON: {exc}") from None
    return from_dict(data, decl)


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(X: Automaton) -> str:
    """Graphviz rendering: step edges labelled ``atoms|p``; accepted atoms as double-line edges."""
    decl = X.decl
    lines = ["digraph gkat {", "  rankdir=LR;", "  node [shape=circle];"]
    if X.start is not None:
        lines.append('  "__start" [shape=point];')
        lines.append(f"  \"__start\" -> {_dot_id(X.start_id)};")
    for s in X.states:
        lines.append(f"  {_dot_id(s)};")
    for i, s in enumerate(X.states):
        acc = X.accept_set(i)
        if not acc.is_empty():
            node = _dot_id(f"__acc_{s}")
            lines.append(f"  {node} [shape=plaintext, label={_dot_id(str(atomset_to_bexp(acc)))}];")
            lines.append(f'  {_dot_id(s)} -> {node} [color="black:black"];')
        groups: dict = {}
        for a in decl.atoms:
            if X.kind[i, a] == K.STEP:
                groups.setdefault((int(X.tgt[i, a]), int(X.act[i, a])), []).append(a)
        for (t, p), atoms in groups.items():
            label = f"{atomset_to_bexp(decl.atom_set(atoms))}|{decl.actions[p]}"
            lines.append(f"  {_dot_id(s)} -> {_dot_id(X.states[t])} [label={_dot_id(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "ACCEPT",
    "REJECT",
    "Automaton",
    "Outcome",
    "Step",
    "brzozowski",
    "continuation",
    "coproduct",
    "dead_states",
    "discrete",
    "export_dot",
    "export_json",
    "from_dict",
    "from_table",
    "guarded_loop",
    "guarded_union",
    "import_json",
    "is_homomorphism",
    "normalize",
    "quotient",
    "quotient_by_bisimilarity",
    "reconstruct",
    "sequence",
    "subautomaton",
    "to_dict",
    "uniform_continuation",
]
