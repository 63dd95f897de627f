"""Emitter geometry, dipoles, detection channels and far-field factors.

Positions are stored in units of ``1/k0`` so the optical phase of atom ``eta``
seen from direction ``R`` is simply ``R . r_eta``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

UNIT_TOL = 1e-12
ZETA_DEGENERACY = 1e-12

# Lab-frame spherical basis, e_(+/-) = -/+ (x +/- i y)/sqrt(2).  Flip the sign
# here to switch convention; symmetry checks do not depend on it.
CIRCULAR_SIGN = -1.0

_SQRT2 = math.sqrt(2.0)


def circular_basis() -> tuple[np.ndarray, np.ndarray]:
    """Return ``(e_plus, e_minus)`` in the lab frame."""
    x = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
    y = np.array([0.0, 1.0, 0.0], dtype=np.complex128)
    e_plus = CIRCULAR_SIGN * (x + 1j * y) / _SQRT2
    e_minus = -CIRCULAR_SIGN * (x - 1j * y) / _SQRT2
    return e_plus, e_minus


def polarization_preset(name: str) -> np.ndarray:
    e_plus, e_minus = circular_basis()
    presets = {
        "e_plus": e_plus,
        "e_minus": e_minus,
        "e_z": np.array([0.0, 0.0, 1.0], dtype=np.complex128),
    }
    try:
        return presets[name].copy()
    except KeyError:
        raise ValueError(f"unknown polarization preset {name!r}; expected one of {sorted(presets)}") from None


PRESETS = ("e_plus", "e_minus", "e_z")


def direction_from_angles(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi),
                     math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


def _unit_direction(direction) -> np.ndarray:
    r = np.asarray(direction, dtype=float)
    if r.shape != (3,) or not np.all(np.isfinite(r)):
        raise ValueError(f"direction must be a finite real 3-vector, got {direction!r}")
    if abs(np.linalg.norm(r) - 1.0) > UNIT_TOL:
        raise ValueError(f"direction must have unit norm, |R| = {np.linalg.norm(r)!r}")
    return r


@dataclass(frozen=True)
class EmitterArray:
    positions: np.ndarray
    local_dim: int

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError(f"positions must be an (N, 3) array with N >= 1, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if self.local_dim < 2:
            raise ValueError(f"local_dim must be >= 2, got {self.local_dim}")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def n_sites(self) -> int:
        return self.positions.shape[0]

    def optical_phases(self, direction) -> np.ndarray:
        """``R . r_eta`` for every atom."""
        return self.positions @ _unit_direction(direction)

    def translated(self, shift) -> "EmitterArray":
        return EmitterArray(self.positions + np.asarray(shift, dtype=float), self.local_dim)

    @classmethod
    def linear_chain(cls, n: int, spacing: float, local_dim: int, axis=(0.0, 0.0, 1.0)) -> "EmitterArray":
        """Atoms at ``(eta - 1) * spacing * axis``."""
        axis = np.asarray(axis, dtype=float)
        return cls(np.outer(np.arange(n) * spacing, axis), local_dim)


def all_pairs(local_dim: int) -> list[tuple[int, int]]:
    """``(alpha, beta)``, ``1 <= alpha < beta <= d``, in lexicographic order."""
    return list(itertools.combinations(range(1, local_dim + 1), 2))


@dataclass(frozen=True)
class TransitionTable:
    """Allowed transitions and their (unit, possibly complex) dipole vectors.

    Pairs absent from ``dipoles`` are forbidden.
    """

    local_dim: int
    dipoles: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.local_dim < 2:
            raise ValueError(f"local_dim must be >= 2, got {self.local_dim}")
        clean = {}
        for key, vec in dict(self.dipoles).items():
            a, b = (int(k) for k in key)
            if not 1 <= a < b <= self.local_dim:
                raise ValueError(f"transition {key} must satisfy 1 <= alpha < beta <= {self.local_dim}")
            v = np.array(vec, dtype=np.complex128).ravel()
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"dipole for {key} must be a finite 3-vector")
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValueError(f"dipole for {key} is the zero vector")
            v = v / norm
            v.flags.writeable = False
            clean[(a, b)] = v
        object.__setattr__(self, "dipoles", dict(sorted(clean.items())))

    @classmethod
    def all_allowed(cls, local_dim: int, dipole=(1.0, 0.0, 0.0)) -> "TransitionTable":
        return cls(local_dim, {p: dipole for p in all_pairs(local_dim)})

    def allowed(self, alpha: int, beta: int) -> bool:
        return (alpha, beta) in self.dipoles

    def dipole(self, alpha: int, beta: int) -> np.ndarray:
        try:
            return self.dipoles[(alpha, beta)]
        except KeyError:
            raise KeyError(f"transition ({alpha}, {beta}) is forbidden") from None

    @property
    def n_allowed(self) -> int:
        return len(self.dipoles)

    @property
    def n_forbidden(self) -> int:
        return self.local_dim * (self.local_dim - 1) // 2 - self.n_allowed

    @property
    def all_real(self) -> bool:
        return all(np.max(np.abs(v.imag)) <= UNIT_TOL for v in self.dipoles.values())


@dataclass(frozen=True)
class DetectionChannel:
    """Observation direction plus a polarization vector per allowed transition."""

    direction: np.ndarray
    polarization: Mapping[tuple[int, int], np.ndarray]
    label: str = ""

    def __post_init__(self):
        r = _unit_direction(self.direction).copy()
        r.flags.writeable = False
        pol = {}
        for key, vec in dict(self.polarization).items():
            e = np.array(vec, dtype=np.complex128).ravel()
            if e.shape != (3,):
                raise ValueError(f"polarization for {key} must be a 3-vector")
            if abs(np.linalg.norm(e) - 1.0) > UNIT_TOL:
                raise ValueError(f"polarization for {key} must have unit norm, got {np.linalg.norm(e)!r}")
            e.flags.writeable = False
            pol[tuple(int(k) for k in key)] = e
        object.__setattr__(self, "direction", r)
        object.__setattr__(self, "polarization", dict(sorted(pol.items())))

    @classmethod
    def from_spec(cls, direction, spec, table: TransitionTable) -> "DetectionChannel":
        """Build a channel from a preset name (used for every allowed
        transition) or a mapping ``(alpha, beta) -> preset name or vector``."""
        if isinstance(spec, str):
            vec = polarization_preset(spec)
            return cls(direction, {p: vec for p in table.dipoles}, label=spec)
        pol = {}
        for key, val in dict(spec).items():
            key = tuple(int(k) for k in key)
            if not table.allowed(*key):
                raise ValueError(f"polarization given for forbidden transition {key}")
            pol[key] = polarization_preset(val) if isinstance(val, str) else val
        missing = set(table.dipoles) - set(pol)
        if missing:
            raise ValueError(f"no polarization given for allowed transitions {sorted(missing)}")
        return cls(direction, pol, label="custom")

    def with_direction(self, direction) -> "DetectionChannel":
        return DetectionChannel(direction, self.polarization, self.label)

    @property
    def all_real(self) -> bool:
        return all(np.max(np.abs(e.imag)) <= UNIT_TOL for e in self.polarization.values())


def projected_dipole(direction, dipole) -> np.ndarray:
    """``R x (R x d) = R (R . d) - d``, the transverse radiated pattern."""
    r = _unit_direction(direction)
    d = np.asarray(dipole, dtype=np.complex128)
    return r * (r @ d) - d


def zeta(channel: DetectionChannel, pair: tuple[int, int], table: TransitionTable) -> complex:
    """``e_ab . (R x (R x d_ab))`` for an allowed transition.

    The dot product is bilinear (no conjugation).  Callers treat
    ``abs(zeta) < ZETA_DEGENERACY`` as a detection-forbidden transition.
    """
    pair = tuple(pair)
    if pair[0] > pair[1]:
        # zeta_ba = conj(zeta_ab)
        return zeta(channel, pair[::-1], table).conjugate()
    if not table.allowed(*pair):
        raise ValueError(f"zeta is undefined for forbidden transition {pair}")
    if pair not in channel.polarization:
        raise ValueError(f"channel has no polarization for transition {pair}")
    v = projected_dipole(channel.direction, table.dipole(*pair))
    return complex(channel.polarization[pair] @ v)


def zeta_is_degenerate(z: complex) -> bool:
    return abs(z) < ZETA_DEGENERACY


def dipole_phase(direction, dipole) -> float:
    """``atan2(v2, v1)`` of the projected dipole ``v``, in ``(-pi, pi]``.

    Only defined for real projected dipoles with a nonzero transverse
    ``(v1, v2)`` part.
    """
    v = projected_dipole(direction, dipole)
    if np.max(np.abs(v.imag)) > UNIT_TOL:
        raise ValueError("dipole phase is only defined for real dipole vectors")
    v1, v2 = float(v[0].real), float(v[1].real)
    if math.hypot(v1, v2) < ZETA_DEGENERACY:
        raise ValueError("dipole phase undefined: projected dipole has no (x, y) component")
    phase = math.atan2(v2, v1)
    return math.pi if phase == -math.pi else phase


def structure_factor(array: EmitterArray, direction) -> float:
    """``|sum_eta exp(i R . r_eta)|**2``."""
    s = np.exp(1j * array.optical_phases(direction)).sum()
    return float(s.real**2 + s.imag**2)
