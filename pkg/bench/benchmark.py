"""Compiled kernels vs the numpy fallback: wall time and agreement.

    python3 bench/benchmark.py [--repeat N]
"""

import argparse
import time

import numpy as np

from paradim import _kernels_py as pure
from paradim.normal_form import model_normal_form
from paradim.pressure import beta_point

try:
    from paradim import _kernels as compiled
except ImportError:
    compiled = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases():
    c = complex(-1.0)
    b = beta_point(c)
    roots = np.array([b, -b], dtype=np.complex128)
    logs = np.zeros(2)
    seeds = np.exp(2j * np.pi * (np.arange(512) + 0.5) / 512) * 1.6
    nf = model_normal_form(0.0)
    cyc = np.array(nf.cycle, dtype=np.complex128)
    return {
        "subtree_lse depth 16": lambda k: k.subtree_lse(c, 1.2, 16, roots, logs)[0],
        "tree_leaves depth 14": lambda k: k.tree_leaves(c, 14, roots, logs)[1],
        "periodic_newton n=10": lambda k: k.periodic_newton(c, 10, seeds, 100, 1e-14, 1e8)[0],
        "backward_chain N=20000": lambda k: k.backward_chain(
            cyc, 1.0, complex(nf.lam), 0.1j, 20000, 60, 1e-14)[0],
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; nothing to compare")
        return
    print(f"{'kernel':<26}{'compiled s':>12}{'python s':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fn in cases().items():
        tc, oc = _best(lambda: fn(compiled), args.repeat)
        tp, op = _best(lambda: fn(pure), args.repeat)
        oc, op = np.asarray(oc), np.asarray(op)
        diff = float(np.max(np.abs(oc - op) / np.maximum(np.abs(oc), 1e-300)))
        print(f"{name:<26}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
