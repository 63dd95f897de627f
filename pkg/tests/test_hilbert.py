import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightwitness.hilbert import (
    CollectiveOperator,
    DensityMatrix,
    LocalOperator,
    StateVector,
    expectation,
    ket,
    ladder,
    mix_white_noise,
    random_product_state,
    random_separable_state,
    reduced_density_matrix,
    site_permutation_matrix,
    tensor_embed,
    variance,
)
from lightwitness.states import dicke_symmetric, two_qutrit_example


def test_state_vector_rejects_unnormalized():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]), 1, 2)


def test_state_vector_rejects_wrong_length():
    with pytest.raises(ValueError):
        StateVector(np.ones(5) / math.sqrt(5), 2, 2)


def test_density_matrix_invariants_enforced():
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]), 1, 2)
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(np.eye(2), 1, 2)
    with pytest.raises(ValueError, match="negative"):
        DensityMatrix(np.diag([1.5, -0.5]), 1, 2)


def test_embed_identity():
    out = tensor_embed(LocalOperator(np.eye(3), 2), 2, 3)
    assert np.array_equal(out, np.eye(9))


def test_embed_kron_pattern():
    out = tensor_embed(LocalOperator(ladder(1, 2, 2), 1), 2, 2)
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[1, 3] = 1.0
    assert np.array_equal(out, expected)


def test_embed_annihilates():
    op = tensor_embed(LocalOperator(ladder(2, 2, 3), 2), 2, 3)
    assert np.allclose(op @ ket([1, 3], 3), 0.0)


def test_embed_errors():
    with pytest.raises(ValueError):
        tensor_embed(LocalOperator(np.eye(2), 3), 2, 2)
    with pytest.raises(ValueError):
        tensor_embed(LocalOperator(np.eye(2), 1), 2, 3)


def test_embed_homomorphism_and_commutation():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        site = int(rng.integers(1, n + 1))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        lhs = tensor_embed(LocalOperator(a @ b, site), n, d)
        rhs = tensor_embed(LocalOperator(a, site), n, d) @ tensor_embed(LocalOperator(b, site), n, d)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))
        if n > 1:
            other = site % n + 1
            ea = tensor_embed(LocalOperator(a, site), n, d)
            eb = tensor_embed(LocalOperator(b, other), n, d)
            assert np.max(np.abs(ea @ eb - eb @ ea)) <= 1e-12


def z_collective(level, n, d):
    return CollectiveOperator(tuple(LocalOperator(ladder(level, level, d), s) for s in range(1, n + 1)))


def test_expectation_examples():
    rho = DensityMatrix(np.outer(ket([1, 1], 3), ket([1, 1], 3)), 2, 3)
    assert expectation(rho, z_collective(1, 2, 3)) == pytest.approx(2.0, abs=1e-12)
    ex = two_qutrit_example().projector()
    assert expectation(ex, z_collective(1, 2, 3)).real == pytest.approx(1.0, abs=1e-12)
    assert expectation(ex, z_collective(3, 2, 3)).real == pytest.approx(1 / 3, abs=1e-12)


def test_expectation_linear_and_conjugate_symmetric():
    rng = np.random.default_rng(3)
    rho = random_separable_state(rng, 2, 3, n_terms=3)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    b = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    assert expectation(rho, 2 * a + b) == pytest.approx(2 * expectation(rho, a) + expectation(rho, b), abs=1e-12)
    assert expectation(rho, a.conj().T) == pytest.approx(np.conj(expectation(rho, a)), abs=1e-12)


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(two_qutrit_example().projector(), np.eye(4))


def test_variance_examples():
    rho = DensityMatrix(np.outer(ket([2, 1], 3), ket([2, 1], 3)), 2, 3)
    assert variance(rho, z_collective(1, 2, 3)) == pytest.approx(0.0, abs=1e-12)
    ex = two_qutrit_example().projector()
    z11 = z_collective(1, 2, 3).dense()
    assert expectation(ex, z11 @ z11).real == pytest.approx(5 / 3, abs=1e-12)
    assert variance(ex, z11) == pytest.approx(2 / 3, abs=1e-12)
    mixed = DensityMatrix(np.eye(3) / 3, 1, 3)
    assert variance(mixed, np.diag([1.0, 0.0, 0.0])) == pytest.approx(2 / 9, abs=1e-12)


def test_mix_white_noise_limits():
    psi = two_qutrit_example()
    assert np.allclose(mix_white_noise(psi, 0.0).entries, psi.projector().entries)
    assert np.allclose(mix_white_noise(psi, 1.0).eigenvalues(), 1 / 9)
    with pytest.raises(ValueError):
        mix_white_noise(psi, 1.5)
    with pytest.raises(ValueError):
        mix_white_noise(psi, -0.1)


def test_mix_white_noise_dicke_spectrum():
    rho = mix_white_noise(dicke_symmetric(2), 0.5)
    assert np.allclose(np.sort(rho.eigenvalues()), [1 / 8, 1 / 8, 1 / 8, 1 / 2 + 1 / 8], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), d=st.integers(2, 4),
       p=st.floats(0.0, 1.0))
def test_mix_white_noise_is_density_matrix(seed, n, d, p):
    rho = mix_white_noise(random_product_state(seed, n, d), p)
    assert rho.eigenvalues().min() >= -1e-10
    assert abs(np.trace(rho.entries) - 1.0) <= 1e-12


@pytest.mark.parametrize("n,d", [(1, 2), (2, 3), (3, 4)])
def test_random_product_state_properties(n, d):
    psi = random_product_state(11, n, d)
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)
    rho = psi.projector()
    for site in range(1, n + 1):
        r = reduced_density_matrix(rho, [site])
        assert np.real(np.trace(r @ r)) == pytest.approx(1.0, abs=1e-10)
    again = random_product_state(11, n, d)
    assert np.array_equal(psi.amplitudes, again.amplitudes)


def test_random_separable_state_is_mixed_and_valid():
    rho = random_separable_state(5, 2, 3, n_terms=4)
    assert rho.purity() < 1.0
    assert rho.eigenvalues().min() >= -1e-10


def test_reduced_density_matrix_of_product():
    a, b = ket([2], 3), ket([3], 3)
    rho = DensityMatrix(np.outer(np.kron(a, b), np.kron(a, b)), 2, 3)
    assert np.allclose(reduced_density_matrix(rho, [1]), np.outer(a, a))
    assert np.allclose(reduced_density_matrix(rho, [2]), np.outer(b, b))


def test_site_permutation_swaps_sites():
    perm = site_permutation_matrix([2, 1], 2, 3)
    assert np.allclose(perm @ ket([1, 3], 3), ket([3, 1], 3))
