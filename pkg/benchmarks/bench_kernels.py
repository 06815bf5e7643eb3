"""Timing comparison: compiled kernel core vs numpy fallback.

Runs the scalar and array hot paths of both backends on identical
inputs and prints a table.  Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from vacdrag.kernels import impl, numpy_impl


def bench(fn, *args, repeat=5, number=200):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def main():
    rng = np.random.default_rng(0)
    omegas = (rng.uniform(-3, 3, 2048) + 1j * rng.uniform(1e-6, 1.0, 2048))
    om = complex(omegas[0])
    slab_args = (0, 0, -0.1, 0.1, 1.0, 14.0, 1.0, 14.0, 1.0, 1)
    sheet_args = (1, 0, -0.2, 0.2, 1.0, 1.1, 0.0, 1.1, 0.0, 0)

    cases = [
        ("characteristic scalar (slab)",
         lambda b: b.characteristic(om, 2.2, 0.4, *slab_args)),
        ("characteristic scalar (sheet)",
         lambda b: b.characteristic(om, 2.2, 0.4, *sheet_args)),
        ("characteristic array 2048 (slab)",
         lambda b: b.characteristic_array(omegas, 2.2, 0.4, *slab_args)),
        ("characteristic array 2048 (sheet)",
         lambda b: b.characteristic_array(omegas, 2.2, 0.4, *sheet_args)),
        ("reflection_slab scalar",
         lambda b: b.reflection_slab(om, 2.2, 14.0, 1.0, 1)),
        ("slab_scan scalar",
         lambda b: b.slab_scan(0.3, 2.2, 14.0, 1.0, 0)),
    ]

    if impl.BACKEND == numpy_impl.BACKEND:
        print("compiled extension not available; only the numpy fallback "
              "was benchmarked")

    width = max(len(name) for name, _ in cases)
    print(f"{'case':<{width}}  {'numpy':>10}  {impl.BACKEND:>10}  speedup")
    for name, call in cases:
        t_np = bench(call, numpy_impl)
        t_impl = bench(call, impl)
        print(f"{name:<{width}}  {t_np * 1e6:>8.2f}us  "
              f"{t_impl * 1e6:>8.2f}us  {t_np / t_impl:>6.1f}x")


if __name__ == "__main__":
    main()
