"""Benchmark the compiled line-profile kernels against the NumPy fallback.

Run:  python benchmarks/bench_kernels.py

Times the raw Lorentzian/Gaussian comb accumulation at fit-loop-realistic
sizes, plus one end-to-end model evaluation (transition table + synthesis)
as used inside the full-model fitter.
"""
import time

import numpy as np

from g4vspec import _kernels_py
from g4vspec import registry_lookup
from g4vspec.spectrum import synth_spectrum, transitions

try:
    from g4vspec import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def time_call(fn, *args, repeat=5, inner=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_comb(name, impl, centers, weights, width, grid):
    out = np.zeros_like(grid)

    def run():
        out[:] = 0.0
        impl(centers, weights, width, grid, out)

    return time_call(run)


def main():
    rng = np.random.Generator(np.random.PCG64(0))
    rows = []
    for n_lines, n_grid in ((20, 2001), (200, 4096), (400, 10000)):
        centers = np.sort(rng.uniform(-500, 500, n_lines))
        weights = rng.uniform(0.1, 1.0, n_lines)
        grid = np.linspace(-800, 800, n_grid)
        t_py = bench_comb("python", _kernels_py.lorentzian_sum,
                          centers, weights, 30.0, grid)
        if HAVE_COMPILED:
            t_c = bench_comb("compiled", _kernels.lorentzian_sum,
                             centers, weights, 30.0, grid)
            rows.append(("lorentzian", n_lines, n_grid, t_py, t_c))
        else:
            rows.append(("lorentzian", n_lines, n_grid, t_py, None))
        t_py = bench_comb("python", _kernels_py.gaussian_sum,
                          centers, weights, 12.0, grid)
        if HAVE_COMPILED:
            t_c = bench_comb("compiled", _kernels.gaussian_sum,
                             centers, weights, 12.0, grid)
            rows.append(("gaussian", n_lines, n_grid, t_py, t_c))
        else:
            rows.append(("gaussian", n_lines, n_grid, t_py, None))

    print(f"{'kernel':<11} {'lines':>6} {'grid':>6} {'numpy':>10} "
          f"{'compiled':>10} {'speedup':>8}")
    for kernel, n_lines, n_grid, t_py, t_c in rows:
        if t_c is None:
            print(f"{kernel:<11} {n_lines:>6} {n_grid:>6} {t_py * 1e6:>8.1f}us "
                  f"{'n/a':>10} {'n/a':>8}")
        else:
            print(f"{kernel:<11} {n_lines:>6} {n_grid:>6} {t_py * 1e6:>8.1f}us "
                  f"{t_c * 1e6:>8.1f}us {t_py / t_c:>7.1f}x")

    # end-to-end model evaluation as the full-model fitter sees it
    emitter = registry_lookup("73Ge")
    grid = np.arange(-300.0, 300.0, 0.5)
    table = transitions(emitter, (0.03, 0.0, 0.08))

    def model_eval():
        synth_spectrum(table, 72.0, grid)

    t = time_call(model_eval, repeat=3, inner=10)
    backend = "compiled" if HAVE_COMPILED else "numpy-only"
    print(f"\nfull synthesis (spin-9/2 table, {len(table)} lines, "
          f"{grid.size} points, {backend} dispatch): {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
