"""Compare the compiled and numpy moment kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times ``offdiag_moments`` on synthetic inputs of increasing size, checks the
backends agree, then times a full 50x100 sweep of the two-qutrit example.
"""
import argparse
import math
import time
import timeit

import numpy as np

from lightwitness import kernels
from lightwitness.scan import AngularGrid, sweep
from lightwitness.states import two_qutrit_example
from lightwitness.verify import mirror_table, pair_on_z

SHAPES = [(5000, 3, 2), (5000, 6, 4), (2048, 10, 5), (512, 28, 8)]


def inputs(rng, g, t, n):
    def c(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    return c(g, t, n), c(t, n), c(t, n, n), c(t, n, n)


def bench_kernel(backends, repeat):
    rng = np.random.default_rng(0)
    print(f"{'G x T x N':>16} " + " ".join(f"{name:>12}" for name in backends) + "   speedup   max|diff|")
    for shape in SHAPES:
        args = inputs(rng, *shape)
        times = {name: min(timeit.repeat(lambda m=mod: m.offdiag_moments(*args), number=3, repeat=repeat)) / 3
                 for name, mod in backends.items()}
        outs = [mod.offdiag_moments(*args) for mod in backends.values()]
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(outs[0], outs[-1]))
        speed = times["python"] / times[list(backends)[-1]]
        label = "x".join(map(str, shape))
        print(f"{label:>16} " + " ".join(f"{times[n] * 1e3:10.3f}ms" for n in backends)
              + f"   {speed:7.2f}x   {diff:.1e}")


def bench_sweep(backends):
    grid = AngularGrid(np.linspace(0.0, math.pi, 50), 2 * math.pi * np.arange(100) / 100)
    default = kernels.offdiag_moments
    try:
        for name, mod in backends.items():
            kernels.offdiag_moments = mod.offdiag_moments
            t0 = time.perf_counter()
            sweep(two_qutrit_example(), pair_on_z(), mirror_table(), "e_plus", grid)
            print(f"50x100 sweep with {name:>6} kernel: {time.perf_counter() - t0:.3f}s")
    finally:
        kernels.offdiag_moments = default


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    if len(backends) == 1:
        print("compiled kernel not built; timing the numpy backend only")
    bench_kernel(backends, args.repeat)
    bench_sweep(backends)


if __name__ == "__main__":
    main()
