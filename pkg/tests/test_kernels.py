import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from lightwitness import _pykernels, kernels

BACKENDS = kernels.available_backends()


def random_inputs(rng, g, t, n):
    def c(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    return c(g, t, n), c(t, n), c(t, n, n), c(t, n, n)


def brute_force(coeff, lam, pp, pq):
    g_count, t_count, n = coeff.shape
    mx = np.zeros((g_count, t_count))
    my = np.zeros_like(mx)
    cx = np.zeros_like(mx)
    cy = np.zeros_like(mx)
    s2 = np.sqrt(2.0)
    for g in range(g_count):
        for t in range(t_count):
            c = coeff[g, t]
            mx[g, t] = sum((c[e] * lam[t, e]).real for e in range(n)) * s2
            my[g, t] = -sum((c[e] * lam[t, e]).imag for e in range(n)) * s2
            for e in range(n):
                for f in range(n):
                    if e == f:
                        continue
                    a = c[e] * c[f] * pp[t, e, f]
                    b = c[e] * np.conj(c[f]) * pq[t, e, f]
                    cx[g, t] += (a + b).real
                    cy[g, t] += (-a + b).real
    return mx, my, cx, cy


@pytest.mark.parametrize("shape", [(1, 1, 1), (3, 3, 2), (5, 6, 4), (2, 10, 7)])
def test_python_kernel_matches_brute_force(shape):
    rng = np.random.default_rng(sum(shape))
    args = random_inputs(rng, *shape)
    for got, want in zip(_pykernels.offdiag_moments(*args), brute_force(*args)):
        assert np.allclose(got, want, atol=1e-12)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    args = random_inputs(rng, int(rng.integers(1, 50)), int(rng.integers(1, 7)), int(rng.integers(1, 6)))
    for a, b in zip(BACKENDS["python"].offdiag_moments(*args), BACKENDS["cython"].offdiag_moments(*args)):
        assert np.allclose(a, b, atol=1e-12)


def test_backend_name():
    assert kernels.BACKEND in BACKENDS
    assert kernels.offdiag_moments is BACKENDS[kernels.BACKEND].offdiag_moments


def test_pure_python_env_forces_fallback():
    env = dict(os.environ, LIGHTWITNESS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from lightwitness import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_benchmark_script_runs():
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run([sys.executable, str(script), "--repeat", "1"], capture_output=True, text=True, check=True)
    assert "default backend" in out.stdout and "50x100 sweep" in out.stdout
