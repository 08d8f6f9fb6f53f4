"""Seeded random expressions for property checks and the axiom suite."""

from __future__ import annotations

import random

from gkat.bexp import AtomSet, TestDecl
from gkat.syntax import Act, Exp, IfThenElse, Seq, Test, While


def random_guard(decl: TestDecl, rng: random.Random) -> AtomSet:
    """Uniform over atom sets, with the constants 0 and 1 made a little likelier."""
    r = rng.random()
    if r < 0.1:
        return decl.no_atoms()
    if r < 0.2:
        return decl.all_atoms()
    return AtomSet(decl, rng.getrandbits(decl.num_atoms))


def random_exp(decl: TestDecl, rng: random.Random, depth: int = 5) -> Exp:
    """A random expression with AST depth at most ``depth`` (leaves have depth 1)."""
    if depth <= 1 or rng.random() < 0.25:
        if decl.actions and rng.random() < 0.6:
            return Act(decl, rng.choice(decl.actions))
        return Test(random_guard(decl, rng))
    r = rng.random()
    if r < 0.35:
        return Seq(random_exp(decl, rng, depth - 1), random_exp(decl, rng, depth - 1))
    if r < 0.7:
        return IfThenElse(random_guard(decl, rng), random_exp(decl, rng, depth - 1), random_exp(decl, rng, depth - 1))
    return While(random_guard(decl, rng), random_exp(decl, rng, depth - 1))


def random_productive(decl: TestDecl, rng: random.Random, depth: int = 5) -> Exp:
    """A random expression ``e`` with E(e) empty.  Needs at least one action."""
    if not decl.actions:
        raise ValueError("productive expressions need an action")
    if depth <= 1 or rng.random() < 0.25:
        return Act(decl, rng.choice(decl.actions))
    r = rng.random()
    if r < 0.4:
        p, q = random_productive(decl, rng, depth - 1), random_exp(decl, rng, depth - 1)
        return Seq(p, q) if rng.random() < 0.5 else Seq(q, p)
    if r < 0.8:
        return IfThenElse(
            random_guard(decl, rng), random_productive(decl, rng, depth - 1), random_productive(decl, rng, depth - 1)
        )
    # a loop is productive exactly when its guard holds everywhere
    return While(decl.all_atoms(), random_exp(decl, rng, depth - 1))


def seq_chain(decl: TestDecl, size: int, right_nested: bool = True) -> Exp:
    """A sequential composition of ``size`` actions (``2 * size - 1`` AST nodes).

    Built iteratively, so very long chains are fine.
    """
    acts = [Act(decl, decl.actions[i % len(decl.actions)]) for i in range(size)]
    if right_nested:
        e = acts[-1]
        for a in reversed(acts[:-1]):
            e = Seq(a, e)
    else:
        e = acts[0]
        for a in acts[1:]:
            e = Seq(e, a)
    return e


def mixed_chain(decl: TestDecl, nodes: int) -> Exp:
    """A right-nested sequence of small blocks (an action, a branch, a loop) with about ``nodes`` AST nodes.

    Uses the first test and the first two actions of ``decl``.
    """
    p = Act(decl, decl.actions[0])
    q = Act(decl, decl.actions[1 % len(decl.actions)])
    t = decl.atom_set(a for a in decl.atoms if a & 1)
    blocks = [p, IfThenElse(t, p, q), While(t, q)]
    sizes = [1, 3, 2]
    chosen = []
    total = -1
    i = 0
    while total < nodes:
        chosen.append(blocks[i % 3])
        total += sizes[i % 3] + 1
        i += 1
    e = chosen[-1]
    for b in reversed(chosen[:-1]):
        e = Seq(b, e)
    return e
