"""Slow reference implementations written straight from the definitions.

They share no code with the library beyond reading automaton rows.
"""

from gkat.automaton import Step


def naive_bisimilar(X, x, Y, y) -> bool:
    """Greatest fixpoint: start from all pairs and drop pairs that break the clauses."""
    m = X.decl.num_atoms
    rx = {s: X.row(s) for s in X.states}
    ry = {s: Y.row(s) for s in Y.states}
    rel = {(u, v) for u in X.states for v in Y.states}
    changed = True
    while changed:
        changed = False
        for u, v in list(rel):
            ok = True
            for a in range(m):
                ou, ov = rx[u][a], ry[v][a]
                if isinstance(ou, Step) and isinstance(ov, Step):
                    ok = ou.action == ov.action and (ou.target, ov.target) in rel
                else:
                    ok = ou == ov
                if not ok:
                    break
            if not ok:
                rel.discard((u, v))
                changed = True
    return (X.states[X.index(x)], Y.states[Y.index(y)]) in rel


def naive_live(X) -> set:
    """States from which some accepting entry is reachable, by fixpoint iteration."""
    live = {s for s in X.states if not X.accept_set(s).is_empty()}
    changed = True
    while changed:
        changed = False
        for s in X.states:
            if s not in live and any(isinstance(o, Step) and o.target in live for o in X.row(s)):
                live.add(s)
                changed = True
    return live


def naive_unfold(X, x, k):
    """Map from atom words (length <= k) to 'accept' / 'reject' / action name, where defined."""
    out = {}
    frontier = [((), X.states[X.index(x)])]
    for _ in range(k):
        nxt = []
        for word, s in frontier:
            for a, o in enumerate(X.row(s)):
                w = word + (a,)
                if isinstance(o, Step):
                    out[w] = o.action
                    nxt.append((w, o.target))
                else:
                    out[w] = o
        frontier = nxt
    return out
