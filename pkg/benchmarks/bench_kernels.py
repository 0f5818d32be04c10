#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--quick]

The same comparison can be forced package-wide by running anything with
LATSPEC_NUMBA=0 in the environment.
"""

import argparse
import time

import numpy as np

from latspec._kernels import get_backend
from latspec.lattice import build_box
from latspec.operator import assemble
from latspec.potentials import AndersonPotential


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes (for CI smoke runs)")
    args = parser.parse_args()

    scale = 0.1 if args.quick else 1.0
    n_sweep = int(1e6 * scale)
    n_steps = int(2e7 * scale)

    nb = get_backend("numba")
    npi = get_backend("numpy")

    rng = np.random.default_rng(0)
    v = rng.normal(scale=0.3, size=n_sweep)
    cps = np.unique(np.geomspace(10, n_sweep, 40).astype(np.int64))

    dom = build_box(2, int(180 * max(scale, 0.3)))
    op = assemble(dom, AndersonPotential(2.0, 1))
    x = (rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n))
    mat = op.matrix

    counters = rng.integers(0, 2 ** 62, size=n_sweep).astype(np.uint64)

    cases = [
        ("uniform01 (hash RNG)",
         lambda impl: impl.uniform01(np.uint64(7), counters)),
        ("transfer_sweep",
         lambda impl: impl.transfer_sweep(0.5, v, cps)),
        ("amplitude_sweep",
         lambda impl: impl.amplitude_sweep(0.5, v, cps)),
        ("halfline_lognorm_sweep",
         lambda impl: impl.halfline_lognorm_sweep(0.5, v, 0.0, 1.0, cps)),
        ("csr_matvec (complex)",
         lambda impl: impl.csr_matvec(mat.data, mat.indices, mat.indptr, x)),
        ("numerov_peaks",
         lambda impl: impl.numerov_peaks(0.0, 4e-4, 1e4 * scale)),
    ]

    # warm up the jit once so compilation is not billed
    for _, fn in cases:
        fn(nb)

    print(f"{'kernel':28s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name, fn in cases:
        t_nb = _time(lambda: fn(nb))
        t_np = _time(lambda: fn(npi), repeats=1)
        print(f"{name:28s} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms "
              f"{t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
