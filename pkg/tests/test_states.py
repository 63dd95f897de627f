import itertools
import math

import numpy as np
import pytest

from lightwitness.geometry import DetectionChannel, EmitterArray, TransitionTable, all_pairs
from lightwitness.hilbert import (
    CollectiveOperator,
    LocalOperator,
    expectation,
    ket,
    ladder,
    reduced_density_matrix,
    site_permutation_matrix,
)
from lightwitness.loos import build_loos, collective_quadratures
from lightwitness.states import (
    NamedState,
    dicke_symmetric,
    make_state,
    permutation_parity,
    singlet_antisymmetric,
    two_qutrit_example,
    w_state,
)


def transpositions(n):
    for i, j in itertools.combinations(range(1, n + 1), 2):
        perm = list(range(1, n + 1))
        perm[i - 1], perm[j - 1] = j, i
        yield site_permutation_matrix(perm, n, n)


@pytest.mark.parametrize("perm,sign", [((0, 1, 2), 1), ((1, 0, 2), -1), ((1, 2, 0), 1), ((2, 1, 0), -1),
                                       ((1, 0, 3, 2), 1), ((1, 2, 3, 0), -1)])
def test_permutation_parity(perm, sign):
    assert permutation_parity(perm) == sign


def test_dicke_examples():
    psi = dicke_symmetric(2).amplitudes
    assert np.allclose(psi, (ket([1, 2], 2) + ket([2, 1], 2)) / math.sqrt(2))
    amps = dicke_symmetric(3).amplitudes
    nz = amps[np.abs(amps) > 0]
    assert nz.size == 6 and np.allclose(nz, 1 / math.sqrt(6))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dicke_symmetric_under_swaps(n):
    psi = dicke_symmetric(n).amplitudes
    for p in transpositions(n):
        assert np.vdot(psi, p @ psi).real == pytest.approx(1.0, abs=1e-12)


def test_singlet_examples():
    psi = singlet_antisymmetric(2).amplitudes
    assert np.allclose(psi, (ket([1, 2], 2) - ket([2, 1], 2)) / math.sqrt(2))
    amps = singlet_antisymmetric(3).amplitudes
    for perm in itertools.permutations(range(3)):
        idx = np.ravel_multi_index(perm, (3, 3, 3))
        assert amps[idx] == pytest.approx(permutation_parity(perm) / math.sqrt(6))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_singlet_antisymmetric_under_swaps(n):
    psi = singlet_antisymmetric(n).amplitudes
    for p in transpositions(n):
        assert np.vdot(psi, p @ psi).real == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_singlet_annihilated_by_traceless_collective(n):
    # equal optical phases: chain on z seen from the equator
    table = TransitionTable.all_allowed(n, (0.0, 0.0, 1.0))
    fam = build_loos(EmitterArray.linear_chain(n, 0.8, n), table,
                     DetectionChannel.from_spec([1.0, 0.0, 0.0], "e_z", table))
    xs, ys, zs = collective_quadratures(fam)
    psi = singlet_antisymmetric(n).amplitudes
    for op in xs + ys:
        assert np.linalg.norm(op.dense() @ psi) <= 1e-12
    for a, b in itertools.combinations(range(n), 2):
        diff = (zs[a].dense() - zs[b].dense()) @ psi
        assert np.linalg.norm(diff) <= 1e-12


def test_w_state_example():
    psi = w_state(2, 3).amplitudes
    expected = (ket([2, 1], 3) + ket([3, 1], 3) + ket([1, 2], 3) + ket([1, 3], 3)) / 2
    assert np.allclose(psi, expected)


@pytest.mark.parametrize("n,d", [(2, 3), (3, 3), (2, 4), (3, 4)])
def test_w_state_single_excitation_and_symmetric(n, d):
    psi = w_state(n, d)
    excitation = CollectiveOperator(tuple(
        LocalOperator(sum(ladder(b, b, d) for b in range(2, d + 1)), s) for s in range(1, n + 1)))
    assert expectation(psi.projector(), excitation).real == pytest.approx(1.0, abs=1e-12)
    amps = psi.amplitudes
    perm = site_permutation_matrix(list(range(2, n + 1)) + [1], n, d)
    assert np.vdot(amps, perm @ amps).real == pytest.approx(1.0, abs=1e-12)
    assert np.count_nonzero(np.abs(amps) > 0) == n * (d - 1)


def test_w_state_rejects_qubits():
    with pytest.raises(ValueError):
        w_state(2, 2)


@pytest.mark.parametrize("fn", [dicke_symmetric, singlet_antisymmetric])
def test_factories_reject_small_n(fn):
    with pytest.raises(ValueError):
        fn(1)


def test_two_qutrit_example():
    psi = two_qutrit_example()
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)
    z22 = CollectiveOperator((LocalOperator(ladder(2, 2, 3), 1), LocalOperator(ladder(2, 2, 3), 2)))
    assert expectation(psi.projector(), z22).real == pytest.approx(2 / 3, abs=1e-12)
    ev = np.sort(np.linalg.eigvalsh(reduced_density_matrix(psi.projector(), [2])))
    assert np.allclose(ev, [0.0, 1 / 3, 2 / 3], atol=1e-12)


def test_make_state_and_named_state():
    st = make_state("w_state", n=2, d=4, noise=0.25)
    assert st.parameters == {"n": 2, "d": 4}
    rho = st.density()
    assert np.trace(rho.entries).real == pytest.approx(1.0)
    assert np.allclose(st.density(0.0).entries, st.psi.projector().entries)
    custom = make_state("custom", n=2, d=2, amplitudes=[1, 0, 0, 1])
    assert np.allclose(custom.psi.amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))
    with pytest.raises(ValueError):
        make_state("ghz", n=2, d=2)
    with pytest.raises(ValueError):
        make_state("custom", n=2, d=2)
    with pytest.raises(ValueError):
        NamedState("dicke_symmetric", dicke_symmetric(2), noise=2.0)


def test_all_pairs_lexicographic():
    assert all_pairs(3) == [(1, 2), (1, 3), (2, 3)]
