"""Dense multi-qudit linear algebra.

Everything here works with full ``d**N`` dimensional vectors and matrices.
It is the reference path that the faster reduced-state kernels are checked
against, so it favours plain Kronecker products over anything clever.

Conventions
-----------
* Sites and levels are 1-based in every public signature (``|1>, ..., |d>``).
* Basis ordering is ``kron(site_1, site_2, ..., site_N)``: site 1 is the most
  significant (slowest varying) digit of the flat index, level ``|1>`` is
  digit 0.
* Randomness always comes from an explicit seed fed to
  ``numpy.random.default_rng`` (PCG64).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
PSD_TOL = -1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


def _check_dims(length: int, n_sites: int, local_dim: int) -> None:
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if local_dim < 2:
        raise ValueError(f"local_dim must be >= 2, got {local_dim}")
    if length != local_dim**n_sites:
        raise ValueError(
            f"dimension {length} does not equal d**N = {local_dim}**{n_sites}"
        )


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_sites: int
    local_dim: int

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        _check_dims(amps.size, self.n_sites, self.local_dim)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector is not normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, n_sites: int, local_dim: int) -> "StateVector":
        """Normalize ``amplitudes`` and wrap them."""
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(amps / norm, n_sites, local_dim)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             self.n_sites, self.local_dim)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    n_sites: int
    local_dim: int
    check_psd: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        rho = _frozen(self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        _check_dims(rho.shape[0], self.n_sites, self.local_dim)
        herm_dev = np.max(np.abs(rho - rho.conj().T))
        if herm_dev > HERMITIAN_TOL:
            raise ValueError(f"density matrix is not Hermitian (max deviation {herm_dev:.3g})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if self.check_psd:
            lo = np.linalg.eigvalsh(rho).min()
            if lo < PSD_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.entries, self.entries)))


@dataclass(frozen=True)
class LocalOperator:
    """A ``d x d`` matrix acting on one (1-based) site."""

    matrix: np.ndarray
    site: int

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"local operator must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def local_dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CollectiveOperator:
    """Site sum ``sum_eta G^(eta)`` with exactly one term per site."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("collective operator needs at least one term")
        sites = sorted(t.site for t in terms)
        if sites != list(range(1, len(terms) + 1)):
            raise ValueError(f"collective operator needs one term per site 1..N, got sites {sites}")
        dims = {t.local_dim for t in terms}
        if len(dims) != 1:
            raise ValueError(f"mixed local dimensions {sorted(dims)}")
        object.__setattr__(self, "terms", tuple(sorted(terms, key=lambda t: t.site)))

    @property
    def n_sites(self) -> int:
        return len(self.terms)

    @property
    def local_dim(self) -> int:
        return self.terms[0].local_dim

    def dense(self) -> np.ndarray:
        n, d = self.n_sites, self.local_dim
        return sum(tensor_embed(t, n, d) for t in self.terms)

    def local_square_sum(self) -> np.ndarray:
        """Dense ``sum_eta (G^(eta))**2``."""
        n, d = self.n_sites, self.local_dim
        return sum(tensor_embed(LocalOperator(t.matrix @ t.matrix, t.site), n, d)
                   for t in self.terms)


def ket(levels: Sequence[int], local_dim: int) -> np.ndarray:
    """Computational basis vector ``|l_1 l_2 ... l_N>`` (levels 1-based)."""
    idx = np.ravel_multi_index(tuple(l - 1 for l in levels), (local_dim,) * len(levels))
    v = np.zeros(local_dim ** len(levels), dtype=np.complex128)
    v[idx] = 1.0
    return v


def ladder(alpha: int, beta: int, local_dim: int) -> np.ndarray:
    """``|alpha><beta|`` on one qudit, levels 1-based."""
    if not (1 <= alpha <= local_dim and 1 <= beta <= local_dim):
        raise ValueError(f"levels ({alpha}, {beta}) out of range 1..{local_dim}")
    m = np.zeros((local_dim, local_dim), dtype=np.complex128)
    m[alpha - 1, beta - 1] = 1.0
    return m


def tensor_embed(op: LocalOperator, n_sites: int, local_dim: int) -> np.ndarray:
    """Return ``I x ... x op.matrix x ... x I`` with the matrix at ``op.site``."""
    if not 1 <= op.site <= n_sites:
        raise ValueError(f"site {op.site} out of range 1..{n_sites}")
    if op.local_dim != local_dim:
        raise ValueError(f"operator dimension {op.local_dim} does not match local_dim {local_dim}")
    left = local_dim ** (op.site - 1)
    right = local_dim ** (n_sites - op.site)
    return np.kron(np.kron(np.eye(left), op.matrix), np.eye(right))


def _as_matrix(o, dim: int) -> np.ndarray:
    m = o.dense() if isinstance(o, CollectiveOperator) else np.asarray(o)
    if m.shape != (dim, dim):
        raise ValueError(f"operator shape {m.shape} does not match state dimension {dim}")
    return m


def expectation(rho: DensityMatrix, o) -> complex:
    """``tr(rho O)`` for a :class:`CollectiveOperator` or a dense matrix."""
    m = _as_matrix(o, rho.dim)
    return complex(np.einsum("ij,ji->", rho.entries, m))


def variance(rho: DensityMatrix, o) -> float:
    """``<O^2> - <O>^2`` for Hermitian ``O``."""
    m = _as_matrix(o, rho.dim)
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValueError("variance requires a Hermitian operator")
    mean = expectation(rho, m).real
    second = expectation(rho, m @ m).real
    return second - mean**2


def mix_white_noise(psi: StateVector, p: float) -> DensityMatrix:
    """``p I/d^N + (1-p) |psi><psi|``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise fraction p must lie in [0, 1], got {p}")
    dim = psi.dim
    rho = p * np.eye(dim) / dim + (1.0 - p) * np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityMatrix(rho, psi.n_sites, psi.local_dim)


def haar_qudit(rng: np.random.Generator, local_dim: int) -> np.ndarray:
    v = rng.normal(size=local_dim) + 1j * rng.normal(size=local_dim)
    return v / np.linalg.norm(v)


def random_product_state(seed, n_sites: int, local_dim: int) -> StateVector:
    """Tensor product of ``n_sites`` Haar-random single-qudit pure states.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(seed)
    amps = np.ones(1, dtype=np.complex128)
    for _ in range(n_sites):
        amps = np.kron(amps, haar_qudit(rng, local_dim))
    return StateVector.from_amplitudes(amps, n_sites, local_dim)


def random_separable_state(seed, n_sites: int, local_dim: int,
                           n_terms: int = 1) -> DensityMatrix:
    """Convex mixture of ``n_terms`` random product states with Dirichlet weights."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms)) if n_terms > 1 else np.ones(1)
    dim = local_dim**n_sites
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for w in weights:
        psi = random_product_state(rng, n_sites, local_dim).amplitudes
        rho += w * np.outer(psi, psi.conj())
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real, n_sites, local_dim)


def _as_tensor(rho: DensityMatrix) -> np.ndarray:
    n, d = rho.n_sites, rho.local_dim
    return rho.entries.reshape((d,) * (2 * n))


def reduced_density_matrix(rho: DensityMatrix, sites: Sequence[int]) -> np.ndarray:
    """Partial trace keeping ``sites`` (1-based, in the given order).

    Returns a ``d**k x d**k`` matrix ordered like ``kron`` over ``sites``.
    """
    n, d = rho.n_sites, rho.local_dim
    keep = [s - 1 for s in sites]
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise ValueError(f"invalid site selection {list(sites)} for N={n}")
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for s in range(n):
        if s not in keep:
            col[s] = row[s]
    out = "".join(row[s] for s in keep) + "".join(col[s] for s in keep)
    spec = "".join(row) + "".join(col) + "->" + out
    red = np.einsum(spec, _as_tensor(rho))
    k = len(keep)
    return red.reshape(d**k, d**k)


def site_permutation_matrix(perm: Sequence[int], n_sites: int, local_dim: int) -> np.ndarray:
    """Unitary that moves the content of site ``i`` to site ``perm[i-1]``."""
    perm0 = [p - 1 for p in perm]
    if sorted(perm0) != list(range(n_sites)):
        raise ValueError(f"{list(perm)} is not a permutation of 1..{n_sites}")
    dim = local_dim**n_sites
    out = np.zeros((dim, dim))
    for idx in range(dim):
        digits = np.unravel_index(idx, (local_dim,) * n_sites)
        new = [0] * n_sites
        for i, p in enumerate(perm0):
            new[p] = digits[i]
        out[np.ravel_multi_index(tuple(new), (local_dim,) * n_sites), idx] = 1.0
    return out
