"""Array kernels over dense automaton tables.

An automaton with ``n`` states over ``m`` atoms is three ``n x m`` arrays:
``kind`` (0 reject, 1 accept, 2 step), ``act`` (action index or -1) and
``tgt`` (target state or -1).

Each kernel has a numba implementation and a plain numpy/Python one.  Numba
is used when it imports and ``GKAT_DISABLE_NUMBA`` is unset or ``0``;
``BACKEND`` records the choice.
"""

from __future__ import annotations

import os
import types

import numpy as np

REJECT, ACCEPT, STEP = 0, 1, 2

DISABLE_ENV = "GKAT_DISABLE_NUMBA"


def _want_numba() -> bool:
    return os.environ.get(DISABLE_ENV, "0") in ("", "0")


try:
    if not _want_numba():
        raise ImportError
    from numba import njit
except ImportError:
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


# -- bisimilarity by union-find ----------------------------------------------
# Status codes returned by the bisimulation kernel.
BISIM_OK = 1
BISIM_FAIL = 0


def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


def _bisim(kind, act, tgt, x, y):
    """Union-find bisimilarity check of states ``x`` and ``y`` in one combined table.

    Returns ``(status, fail_index, fail_atom, processed, parent, qx, qy, qpar, qatom)``.
    The queue arrays record each merged pair, the queue index of the pair
    that caused it, and the atom on which it was reached.
    """
    n, m = kind.shape
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    qx = np.empty(n, dtype=np.int64)
    qy = np.empty(n, dtype=np.int64)
    qpar = np.empty(n, dtype=np.int64)
    qatom = np.empty(n, dtype=np.int64)
    qx[0] = x
    qy[0] = y
    qpar[0] = -1
    qatom[0] = -1
    tail = 1
    if x != y:
        parent[y] = x
        rank[x] = 1
    head = 0
    while head < tail:
        u = qx[head]
        v = qy[head]
        for a in range(m):
            ku = kind[u, a]
            kv = kind[v, a]
            if ku != kv:
                return BISIM_FAIL, head, a, head, parent, qx, qy, qpar, qatom
            if ku == 2:
                if act[u, a] != act[v, a]:
                    return BISIM_FAIL, head, a, head, parent, qx, qy, qpar, qatom
                tu = tgt[u, a]
                tv = tgt[v, a]
                ru = _find(parent, tu)
                rv = _find(parent, tv)
                if ru != rv:
                    if rank[ru] < rank[rv]:
                        parent[ru] = rv
                    elif rank[ru] > rank[rv]:
                        parent[rv] = ru
                    else:
                        parent[rv] = ru
                        rank[ru] += 1
                    qx[tail] = tu
                    qy[tail] = tv
                    qpar[tail] = head
                    qatom[tail] = a
                    tail += 1
        head += 1
    return BISIM_OK, -1, -1, head, parent, qx, qy, qpar, qatom


def _resolve_all(parent):
    out = parent.copy()
    for i in range(out.shape[0]):
        out[i] = _find(parent, i)
    return out


# -- dead states -------------------------------------------------------------


def _csr_reverse(kind, tgt):
    """Predecessor lists over step edges as (offsets, sources)."""
    n, m = kind.shape
    counts = np.zeros(n + 1, dtype=np.int64)
    for s in range(n):
        for a in range(m):
            if kind[s, a] == 2:
                counts[tgt[s, a] + 1] += 1
    for i in range(n):
        counts[i + 1] += counts[i]
    fill = counts[:-1].copy()
    srcs = np.empty(counts[n], dtype=np.int64)
    for s in range(n):
        for a in range(m):
            if kind[s, a] == 2:
                t = tgt[s, a]
                srcs[fill[t]] = s
                fill[t] += 1
    return counts, srcs


def _live_loop(kind, tgt):
    n, m = kind.shape
    offs, srcs = _csr_reverse(kind, tgt)
    live = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for s in range(n):
        for a in range(m):
            if kind[s, a] == 1:
                live[s] = True
                stack[top] = s
                top += 1
                break
    while top > 0:
        top -= 1
        t = stack[top]
        for i in range(offs[t], offs[t + 1]):
            s = srcs[i]
            if not live[s]:
                live[s] = True
                stack[top] = s
                top += 1
    return live


def _live_numpy(kind, tgt):
    """Vectorized reverse BFS, one frontier per iteration."""
    n = kind.shape[0]
    step = kind == STEP
    src = np.nonzero(step)[0]
    dst = tgt[step]
    order = np.argsort(dst, kind="stable")
    src, dst = src[order], dst[order]
    offs = np.searchsorted(dst, np.arange(n + 1))
    live = (kind == ACCEPT).any(axis=1)
    frontier = np.nonzero(live)[0]
    while frontier.size:
        starts, ends = offs[frontier], offs[frontier + 1]
        lens = ends - starts
        if not lens.sum():
            break
        idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
        preds = np.unique(src[idx])
        preds = preds[~live[preds]]
        live[preds] = True
        frontier = preds
    return live


# -- unfolding -----------------------------------------------------------------


def _unfold_numpy(kind, act, tgt, x, k):
    code = np.where(kind == STEP, act + 2, kind).astype(np.int32)
    levels = []
    states = np.array([x], dtype=np.int64)
    for _ in range(k):
        ok = states >= 0
        safe = np.where(ok, states, 0)
        lev = np.where(ok[:, None], code[safe], -1).reshape(-1)
        nxt = np.where(ok[:, None] & (kind[safe] == STEP), tgt[safe], -1).reshape(-1)
        levels.append((lev, nxt))
        states = nxt
    return levels


def _unfold_level(kind, act, tgt, states):
    n_in = states.shape[0]
    m = kind.shape[1]
    lev = np.full(n_in * m, -1, dtype=np.int32)
    nxt = np.full(n_in * m, -1, dtype=np.int64)
    for i in range(n_in):
        s = states[i]
        if s < 0:
            continue
        for a in range(m):
            kd = kind[s, a]
            j = i * m + a
            if kd == 2:
                lev[j] = act[s, a] + 2
                nxt[j] = tgt[s, a]
            else:
                lev[j] = kd
    return lev, nxt


def _unfold_loop(kind, act, tgt, x, k):
    levels = []
    states = np.array([x], dtype=np.int64)
    for _ in range(k):
        lev, nxt = _unfold_level(kind, act, tgt, states)
        levels.append((lev, nxt))
        states = nxt
    return levels


# -- partition refinement ------------------------------------------------------


def refine(kind, act, tgt, classes=None):
    """Coarsest stable partition (Moore refinement); returns class ids numbered by first occurrence.

    Numpy only: it runs on small automata (quotients, fixtures), not on the hot path.
    """
    n, m = kind.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    cls = np.zeros(n, dtype=np.int64) if classes is None else np.asarray(classes, dtype=np.int64)
    count = -1
    while True:
        tcls = np.where(kind == STEP, cls[np.where(tgt >= 0, tgt, 0)], -1)
        sig = np.concatenate([cls[:, None], kind.astype(np.int64), act.astype(np.int64), tcls], axis=1)
        _, first, inv = np.unique(sig, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        # relabel by first occurrence so the numbering is canonical
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        cls = rank[inv]
        if len(first) == count:
            return cls
        count = len(first)


_find_py = _find
_bisim_py = _bisim

if njit is not None:
    _find = njit(cache=True)(_find)
    bisim = njit(cache=True)(_bisim)
    resolve_all = njit(cache=True)(_resolve_all)
    _csr_reverse = njit(cache=True)(_csr_reverse)
    live_states = njit(cache=True)(_live_loop)
    _unfold_level = njit(cache=True)(_unfold_level)
    unfold_levels = _unfold_loop
else:
    bisim = _bisim
    resolve_all = _resolve_all
    live_states = _live_numpy
    unfold_levels = _unfold_numpy


def python_reference():
    """The non-numba implementations, for cross-checking and benchmarking."""
    return {
        "bisim": types.FunctionType(_bisim_py.__code__, {**globals(), "_find": _find_py}, "_bisim"),
        "live_states": _live_numpy,
        "unfold_levels": _unfold_numpy,
    }
