#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Covers the three hot paths: cosine-feature path evaluation on a dense grid,
SE-ARD cross-covariance, and the truncated-entropy average that dominates
acquisition evaluation. Run after building the extension:

    python benchmarks/bench_backends.py
"""

import time

import numpy as np

from jesbo import _core_py

try:
    from jesbo import _core
except ImportError:
    _core = None


def timeit(fn, repeats=30):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1e3


def bench(name, make_args, fn_name, repeats=30):
    args = make_args()
    py_ms = timeit(lambda: getattr(_core_py, fn_name)(*args), repeats)
    if _core is None:
        print(f"{name:38s} numpy {py_ms:8.3f} ms   (compiled core not built)")
        return
    c_ms = timeit(lambda: getattr(_core, fn_name)(*args), repeats)
    print(f"{name:38s} numpy {py_ms:8.3f} ms   compiled {c_ms:8.3f} ms   x{py_ms / c_ms:5.2f}")


def main():
    rng = np.random.default_rng(0)

    def path_args(d):
        f, b = 1024, 2000
        return (
            rng.standard_normal((d, f)).astype(np.float32),
            rng.uniform(0, 2 * np.pi, f).astype(np.float32),
            rng.standard_normal(f).astype(np.float32),
            rng.random((b, d)).astype(np.float32),
        )

    def se_args():
        return (
            rng.random((2048, 4)),
            rng.random((128, 4)),
            1.0 / rng.uniform(0.1, 1.0, 4) ** 2,
            2.5,
        )

    def entropy_args():
        l, b = 100, 2048
        return (
            rng.normal(0, 2, (l, b)),
            rng.uniform(0, 3, (l, b)),
            rng.normal(1, 2, l),
            0.01,
        )

    print(f"backends: numpy vs {'compiled' if _core is not None else 'NOT BUILT'}")
    bench("path_values   (F=1024, B=2000, D=2)", lambda: path_args(2), "path_values")
    bench("path_values   (F=1024, B=2000, D=6)", lambda: path_args(6), "path_values")
    bench("path_values   (F=1024, B=2000, D=12)", lambda: path_args(12), "path_values")
    bench("se_cross      (2048 x 128, D=4)", se_args, "se_cross")
    bench("avg_trunc_entropy (L=100, B=2048)", entropy_args, "avg_trunc_entropy")


if __name__ == "__main__":
    main()
