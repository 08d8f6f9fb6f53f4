"""Compare the numba kernels with the numpy/Python fallbacks.

    python3 benchmarks/bench_kernels.py --nodes 1000 10000 100000

For each size a chain expression is turned into its derivative automaton and
every kernel is timed on it (median of ``--repeat`` runs, after one warm-up
call that also triggers compilation).  Results of the two implementations
are checked for agreement.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from gkat import _kernels as K
from gkat.automaton import brzozowski
from gkat.bexp import TestDecl
from gkat.generate import mixed_chain


def _time(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--depth", type=int, default=12, help="unfolding depth")
    args = parser.parse_args(argv)

    if K.BACKEND != "numba":
        print("numba is unavailable or disabled; only the fallback is timed")
    ref = K.python_reference()
    print(f"{'nodes':>8} {'states':>8} {'kernel':>14} {'fallback s':>12} {'numba s':>12} {'speedup':>8}")
    for n in args.nodes:
        decl = TestDecl(["t"], ["p", "q"])
        X = brzozowski(mixed_chain(decl, n))
        kind = np.vstack([X.kind, X.kind])
        act = np.vstack([X.act, X.act])
        tgt = np.vstack([X.tgt.astype(np.int64), np.where(X.tgt >= 0, X.tgt.astype(np.int64) + len(X), -1)])
        act64, tgt64 = X.act.astype(np.int64), X.tgt.astype(np.int64)
        cases = {
            "bisim": (lambda: K.bisim(kind, act, tgt, 0, len(X)), lambda: ref["bisim"](kind, act, tgt, 0, len(X))),
            "live_states": (lambda: K.live_states(X.kind, tgt64), lambda: ref["live_states"](X.kind, tgt64)),
            "unfold_levels": (
                lambda: K.unfold_levels(X.kind, act64, tgt64, 0, args.depth),
                lambda: ref["unfold_levels"](X.kind, act64, tgt64, 0, args.depth),
            ),
        }
        for name, (fast, slow) in cases.items():
            a, b = fast(), slow()
            if name == "bisim":
                assert a[0] == b[0] and a[3] == b[3], "kernels disagree"
            elif name == "live_states":
                assert np.array_equal(a, b), "kernels disagree"
            else:
                assert all(np.array_equal(x[0], y[0]) for x, y in zip(a, b)), "kernels disagree"
            t_slow = _time(slow, args.repeat)
            t_fast = _time(fast, args.repeat) if K.BACKEND == "numba" else float("nan")
            print(f"{n:>8} {len(X):>8} {name:>14} {t_slow:>12.5f} {t_fast:>12.5f} {t_slow / t_fast:>8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
