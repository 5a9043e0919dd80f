"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from hallstokes._kernels import _fallback
from hallstokes.ode import _A, _B
from hallstokes.quiver import hall_algebra

try:
    from hallstokes._kernels import _ckernels
except ImportError:
    _ckernels = None


def hall_case(N: int, d: int):
    alg = hall_algebra(N, d)
    rng = np.random.default_rng(0)
    f = rng.integers(-3, 4, alg.size).astype(np.int64)
    g = rng.integers(-3, 4, alg.size).astype(np.int64)
    tables = [t for row in alg.tables.values() for t in row.values()]

    def run(impl):
        out = np.zeros(alg.size, dtype=np.int64)
        for m, a, b, mult in tables:
            impl.hall_accumulate_int(m, a, b, mult, f, g, out)
        return out

    return run


def sweep_case(n: int):
    rng = np.random.default_rng(1)
    s = _A.shape[0]
    coef = np.ascontiguousarray(rng.normal(size=(n, s)) + 1j * rng.normal(size=(n, s)))
    forcing = np.ascontiguousarray(rng.normal(size=(n, s)) + 1j * rng.normal(size=(n, s)))
    delta = np.full(n, 0.01)

    def run(impl):
        return impl.collocation_sweep(coef, forcing, delta, 1 + 0j, False, _A, _B)

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the fallback is available")
    cases = {"hall product A3 d=6": hall_case(3, 6), "hall product A4 d=6": hall_case(4, 6),
             "collocation sweep 2000 steps": sweep_case(2000)}
    print(f"{'case':32s} {'fallback [ms]':>14s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, run in cases.items():
        t_py = min(timeit.repeat(lambda: run(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:32s} {t_py:14.2f} {'-':>14s} {'-':>8s}")
            continue
        a, b = run(_fallback), run(_ckernels)
        same = all(np.allclose(x, y) for x, y in zip(a, b)) if isinstance(a, tuple) else np.array_equal(a, b)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        t_c = min(timeit.repeat(lambda: run(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:14.2f} {t_c:14.2f} {t_py / t_c:8.1f}")


if __name__ == "__main__":
    main()
