"""Compiled kernels versus the numpy fallback.

    python benchmarks/bench_kernels.py [--n 512] [--d 4096] [--repeat 3]

Prints one line per kernel with the best-of-``repeat`` wall time of each
backend and the speedup. Results are checked for equality before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from corramp import _kernels_py as fallback
from corramp.gf2k import find_irreducible
from corramp.signs import pack

try:
    from corramp import _ckernels as compiled
except ImportError:  # the extension was not built
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, d, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, (n, d)).astype(np.int8)
    B = rng.integers(-4, 5, (n, d)).astype(np.int8)
    X = rng.choice(np.array([-1, 1], dtype=np.int8), (n, d))
    Y = rng.choice(np.array([-1, 1], dtype=np.int8), (n, d))
    PX, PY = pack(X), pack(Y)
    f = find_irreducible(61)
    ga = rng.integers(0, f.order, n * 64, dtype=np.uint64)
    gc = rng.integers(0, f.order, n * 64, dtype=np.uint64)

    def gemm(impl):
        out = np.zeros((n, n), dtype=np.int64)
        impl.gemm_nt_i8(A, B, out, 4096)
        return out

    def popcount(impl):
        out = np.zeros((n, n), dtype=np.int64)
        impl.popcount_ip(PX, PY, d, out)
        return out

    def gfmul(impl):
        out = np.empty_like(ga)
        impl.gf_mul_vec(ga, gc, f.low, f.b, out)
        return out

    return {"gemm_nt_i8": gemm, "popcount_ip": popcount, "gf_mul_vec (b=61)": gfmul}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--d", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled extension not available; only the fallback can be timed")
    print(f"n = {args.n}, d = {args.d}, best of {args.repeat}")
    print(f"{'kernel':<20} {'compiled (s)':>13} {'fallback (s)':>13} {'speedup':>8}")
    for name, fn in cases(args.n, args.d, args.seed).items():
        t_py = best_of(lambda: fn(fallback), args.repeat)
        if compiled is None:
            print(f"{name:<20} {'-':>13} {t_py:>13.4f} {'-':>8}")
            continue
        assert np.array_equal(fn(compiled), fn(fallback)), name
        t_c = best_of(lambda: fn(compiled), args.repeat)
        print(f"{name:<20} {t_c:>13.4f} {t_py:>13.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
