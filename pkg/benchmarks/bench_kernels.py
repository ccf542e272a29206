"""Compare the compiled kernel backend against the pure-Python fallback.

Run directly: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import difftest._kernels_py as kp

try:
    import difftest._kernels as kc
except ImportError:
    kc = None


def bench(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n, m_sub = 1000, 10
    delta = float(n) ** (-2.0 / 3.0) / m_sub
    z = rng.standard_normal(n * m_sub)
    path = kp.euler_path_1d(0, 0.5, 0.5, 0.25, 1.0, n, m_sub, delta, z, 0)

    cases = [
        ("euler_path_1d (OU, n=1000, M=10)",
         lambda k: k.euler_path_1d(0, 0.5, 0.5, 0.25, 1.0, n, m_sub, delta, z, 0)),
        ("contrast_terms_1d (n=1000)",
         lambda k: k.contrast_terms_1d(0, path, delta * m_sub, 0.5, 0.5, 0.25)),
        ("contrast_total_1d (n=1000)",
         lambda k: k.contrast_total_1d(0, path, delta * m_sub, 0.5, 0.5, 0.25)),
    ]

    print(f"{'kernel':40s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, call in cases:
        t_py = bench(call, kp)
        if kc is None:
            print(f"{name:40s} {t_py * 1e3:10.3f}ms {'missing':>12s}")
            continue
        t_c = bench(call, kc)
        print(f"{name:40s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
