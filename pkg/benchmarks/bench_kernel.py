"""Compare the GMP kernel with the pure-Python fallback.

Two measurements per backend:

* raw ``level_measure`` throughput on the normalized shapes of ``F_1``
  and of a signed combination at base 10;
* an end-to-end ``weak_norm`` of one signed combination, caches cleared.

Run with ``python benchmarks/bench_kernel.py [--n 8] [--repeat 3]``.
"""
from __future__ import annotations

import argparse
import time
from fractions import Fraction

import weakl1.kernel as kernel
from weakl1 import _kernel_py
from weakl1.construction import ConstructionParams, SignVector, combine_signs, make_F_k
from weakl1.pwfunc import clear_caches, weak_norm

try:
    from weakl1 import _kernel as _kernel_gmp
except ImportError:
    _kernel_gmp = None


def _shapes(n: int) -> list:
    p = ConstructionParams(n)
    fs = [make_F_k(p, 1), combine_signs(p, SignVector.from_index(5, p.N))]
    seen = {}
    for f in fs:
        for w, shape in f.normal_forms():
            seen.setdefault(shape.key, shape)
    return list(seen.values())


def bench_queries(impl, shapes, q: int, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for sh in shapes:
            for mu in (Fraction(1, 2), Fraction(3), Fraction(20)):
                impl.level_measure(sh.c0, sh.sigmas, sh.coeffs, mu, Fraction(1, 2 ** q), 10**6)
        best = min(best, time.perf_counter() - start)
    return best


def bench_norm(impl, n: int, tol: Fraction, repeat: int) -> float:
    p = ConstructionParams(n)
    saved = kernel.level_measure, kernel.shape_range
    kernel.level_measure, kernel.shape_range = impl.level_measure, impl.shape_range
    try:
        best = float("inf")
        for _ in range(repeat):
            clear_caches()
            g = combine_signs(p, SignVector.from_index(1, p.N))
            start = time.perf_counter()
            weak_norm(g, tol)
            best = min(best, time.perf_counter() - start)
        return best
    finally:
        kernel.level_measure, kernel.shape_range = saved
        clear_caches()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--q", type=int, default=14, help="bisection depth 2^-q")
    ap.add_argument("--tol", default="1/10000")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = [("python", _kernel_py)]
    if _kernel_gmp is not None:
        impls.insert(0, ("gmp", _kernel_gmp))
    else:
        print("compiled kernel not built; only the fallback is timed")

    shapes = _shapes(args.n)
    tol = Fraction(args.tol)
    rows = []
    for name, impl in impls:
        tq = bench_queries(impl, shapes, args.q, args.repeat)
        tn = bench_norm(impl, args.n, tol, args.repeat)
        rows.append((name, tq, tn))
    print(f"n = {args.n}, {len(shapes)} shapes x 3 levels, depth 2^-{args.q}, norm tol {tol}")
    print(f"{'backend':<8} {'queries [s]':>12} {'weak_norm [s]':>14}")
    for name, tq, tn in rows:
        print(f"{name:<8} {tq:>12.4f} {tn:>14.4f}")
    if len(rows) == 2:
        print(f"speed-up: queries x{rows[1][1] / rows[0][1]:.1f}, "
              f"weak_norm x{rows[1][2] / rows[0][2]:.1f}")


if __name__ == "__main__":
    main()
