"""Phase-dependent local orthogonal observables (LOOs).

For every atom ``eta`` and transition ``alpha < beta``::

    G+ = ( c Lab + c* Lba ) / sqrt(2)
    G- = i ( c Lab - c* Lba ) / sqrt(2)        c = exp(-i R.r_eta) u_ab

and one population projector ``|beta><beta|`` per level.  ``u_ab`` is the
unit phase of the far-field factor ``zeta``; forbidden and degenerate
transitions use ``u = 1`` but keep the optical phase.

Index layout (0-based in arrays, matching the 1-based ``mu`` labels):
``[0, T)`` are the ``+`` quadratures, ``[T, 2T)`` the ``-`` quadratures and
``[2T, d**2)`` the populations, with ``T = d(d-1)/2`` pairs in lexicographic
order.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DetectionChannel,
    EmitterArray,
    TransitionTable,
    all_pairs,
    zeta,
    zeta_is_degenerate,
)
from .hilbert import CollectiveOperator, LocalOperator

_SQRT2 = math.sqrt(2.0)


class DegenerateZetaWarning(UserWarning):
    """A transition is invisible in the chosen channel; its LOOs use u = 1."""


@dataclass(frozen=True)
class LooIndexMap:
    local_dim: int

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return all_pairs(self.local_dim)

    @property
    def n_pairs(self) -> int:
        return self.local_dim * (self.local_dim - 1) // 2

    @property
    def size(self) -> int:
        return self.local_dim**2

    def plus(self, alpha: int, beta: int) -> int:
        """1-based ``mu_+`` index of the pair."""
        return self.pairs.index((alpha, beta)) + 1

    def minus(self, alpha: int, beta: int) -> int:
        return self.n_pairs + self.plus(alpha, beta)

    def population(self, beta: int) -> int:
        if not 1 <= beta <= self.local_dim:
            raise ValueError(f"level {beta} out of range")
        return 2 * self.n_pairs + beta

    def label(self, mu: int) -> tuple[str, tuple[int, ...]]:
        """Inverse map: ``mu -> ('+', (a, b)) | ('-', (a, b)) | ('z', (b,))``."""
        if not 1 <= mu <= self.size:
            raise ValueError(f"index {mu} out of range 1..{self.size}")
        t = self.n_pairs
        if mu <= t:
            return "+", self.pairs[mu - 1]
        if mu <= 2 * t:
            return "-", self.pairs[mu - t - 1]
        return "z", (mu - 2 * t,)


def _loo_block(d: int, pairs, coeffs: np.ndarray, minus_shift: np.ndarray | None = None) -> np.ndarray:
    """Matrices for one atom; ``coeffs[t]`` is ``c`` for pair ``t``."""
    t_count = len(pairs)
    g = np.zeros((d * d, d, d), dtype=np.complex128)
    for t, (a, b) in enumerate(pairs):
        c = coeffs[t]
        cm = c if minus_shift is None else c * minus_shift[t]
        g[t, a - 1, b - 1] = c / _SQRT2
        g[t, b - 1, a - 1] = np.conj(c) / _SQRT2
        g[t_count + t, a - 1, b - 1] = 1j * cm / _SQRT2
        g[t_count + t, b - 1, a - 1] = -1j * np.conj(cm) / _SQRT2
    for lvl in range(d):
        g[2 * t_count + lvl, lvl, lvl] = 1.0
    return g


@dataclass(frozen=True)
class LooFamily:
    """Per-atom LOO matrices for one direction and channel.

    ``matrices`` has shape ``(N, d**2, d, d)``; ``coefficients[t, eta]`` is
    ``exp(-i R.r_eta) u_t`` for pair ``t``.
    """

    matrices: np.ndarray
    unit_phases: np.ndarray
    optical_phases: np.ndarray
    direction: np.ndarray
    channel_label: str = ""
    degenerate: tuple = ()
    warnings: tuple = field(default=(), compare=False)

    @property
    def n_sites(self) -> int:
        return self.matrices.shape[0]

    @property
    def local_dim(self) -> int:
        return self.matrices.shape[2]

    @property
    def index(self) -> LooIndexMap:
        return LooIndexMap(self.local_dim)

    @property
    def coefficients(self) -> np.ndarray:
        return self.unit_phases[:, None] * np.exp(-1j * self.optical_phases)[None, :]

    def at_atom(self, eta: int) -> np.ndarray:
        """``(d**2, d, d)`` LOO set of atom ``eta`` (1-based)."""
        return self.matrices[eta - 1]


def unit_phases_for(table: TransitionTable, channel: DetectionChannel):
    """Unit phase ``u`` per pair (1 for forbidden/degenerate) and the list of
    degenerate pairs."""
    pairs = all_pairs(table.local_dim)
    u = np.ones(len(pairs), dtype=np.complex128)
    degenerate = []
    for t, pair in enumerate(pairs):
        if not table.allowed(*pair):
            continue
        z = zeta(channel, pair, table)
        if zeta_is_degenerate(z):
            degenerate.append(pair)
        else:
            u[t] = z / abs(z)
    return u, tuple(degenerate)


def build_loos(array: EmitterArray, table: TransitionTable, channel: DetectionChannel,
               *, _minus_phase_fault: float = 0.0) -> LooFamily:
    """Build the phase-dependent LOO family seen through ``channel``.

    ``_minus_phase_fault`` rotates the ``-`` quadratures by an extra phase;
    it exists only as a negative control for the verification suite.
    """
    if array.local_dim != table.local_dim:
        raise ValueError(f"array has d={array.local_dim} but transition table has d={table.local_dim}")
    d = array.local_dim
    pairs = all_pairs(d)
    u, degenerate = unit_phases_for(table, channel)
    notes = []
    for pair in degenerate:
        msg = f"|zeta| < 1e-12 for transition {pair}; treated as detection-forbidden"
        notes.append(msg)
        warnings.warn(msg, DegenerateZetaWarning, stacklevel=2)
    phases = array.optical_phases(channel.direction)
    shift = None
    if _minus_phase_fault:
        shift = np.full(len(pairs), np.exp(1j * _minus_phase_fault))
    mats = np.stack([
        _loo_block(d, pairs, u * np.exp(-1j * phases[eta]), shift)
        for eta in range(array.n_sites)
    ])
    mats.flags.writeable = False
    u.flags.writeable = False
    phases.flags.writeable = False
    return LooFamily(mats, u, phases, channel.direction, channel.label, degenerate, tuple(notes))


def collective_quadratures(family: LooFamily):
    """``(X, Y, Z)`` lists of :class:`CollectiveOperator`, one per ``mu``."""
    t = family.index.n_pairs
    d = family.local_dim

    def collective(m):
        return CollectiveOperator(tuple(
            LocalOperator(family.matrices[eta, m], eta + 1) for eta in range(family.n_sites)
        ))

    xs = [collective(m) for m in range(t)]
    ys = [collective(m) for m in range(t, 2 * t)]
    zs = [collective(m) for m in range(2 * t, 2 * t + d)]
    return xs, ys, zs


@dataclass(frozen=True)
class LooDecomposition:
    coefficients: np.ndarray

    def reconstruct(self, loos: np.ndarray) -> np.ndarray:
        return np.einsum("m,mij->ij", self.coefficients, loos)

    @property
    def squared_norm(self) -> float:
        return float(np.sum(self.coefficients**2))


def loo_decompose(rho_single, loos: np.ndarray) -> LooDecomposition:
    """Coefficients ``g_m = tr(rho G_m)`` of a single-atom state."""
    rho = np.asarray(rho_single, dtype=np.complex128)
    loos = np.asarray(loos)
    d = loos.shape[-1]
    if rho.shape != (d, d) or loos.shape != (d * d, d, d):
        raise ValueError(f"expected a {d}x{d} state and {d * d} LOOs, got {rho.shape} and {loos.shape}")
    g = np.einsum("ij,mji->m", rho, loos)
    return LooDecomposition(np.real(g))


def square_sum(loos: np.ndarray) -> np.ndarray:
    """``sum_m G_m G_m``."""
    return np.einsum("mij,mjk->ik", loos, loos)


def basis_deviation(loos: np.ndarray) -> tuple[float, float]:
    """Max deviations from ``tr(G_m G_n) = delta_mn`` and ``sum G_m^2 = d I``.

    Any trace-orthonormal basis of ``d**2`` Hermitian operators squares to
    ``d I`` (take the trace of both sides), which is the completeness
    relation checked here.
    """
    d = loos.shape[-1]
    gram = np.einsum("mij,nji->mn", loos, loos)
    ortho = np.max(np.abs(gram - np.eye(d * d)))
    comp = np.max(np.abs(square_sum(loos) - d * np.eye(d)))
    return float(ortho), float(comp)
