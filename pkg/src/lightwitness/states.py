"""Reference states: symmetric Dicke, SU(d) singlet, qudit W and the
two-qutrit polarization example."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import DensityMatrix, StateVector, ket, mix_white_noise

LABELS = ("dicke_symmetric", "singlet", "w_state", "two_qutrit_example", "custom")


def permutation_parity(perm) -> int:
    """+1 for even, -1 for odd permutations (counted via cycle lengths)."""
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _permutation_state(n: int, signed: bool) -> StateVector:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    amps = np.zeros(n**n, dtype=np.complex128)
    norm = 1.0 / math.sqrt(math.factorial(n))
    for perm in itertools.permutations(range(n)):
        sign = permutation_parity(perm) if signed else 1
        amps += sign * norm * ket([p + 1 for p in perm], n)
    return StateVector(amps, n, n)


def dicke_symmetric(n: int) -> StateVector:
    """Occupation-(1, ..., 1) symmetric state of ``n`` qudits with ``d = n``."""
    return _permutation_state(n, signed=False)


def singlet_antisymmetric(n: int) -> StateVector:
    """Totally antisymmetric SU(n) singlet of ``n`` qudits, ``d = n``.

    Signs use ordinary permutation parity.
    """
    return _permutation_state(n, signed=True)


def w_state(n: int, d: int) -> StateVector:
    """One excitation to any level ``j >= 2`` shared equally over ``n`` sites."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if d < 3:
        raise ValueError(f"qudit W state requires d >= 3, got {d}")
    amps = np.zeros(d**n, dtype=np.complex128)
    for site in range(n):
        for level in range(2, d + 1):
            levels = [1] * n
            levels[site] = level
            amps += ket(levels, d)
    return StateVector(amps / math.sqrt((d - 1) * n), n, d)


def two_qutrit_example() -> StateVector:
    """``(|11> + |22> + |13>) / sqrt(3)``."""
    amps = ket([1, 1], 3) + ket([2, 2], 3) + ket([1, 3], 3)
    return StateVector(amps / math.sqrt(3.0), 2, 3)


@dataclass(frozen=True)
class NamedState:
    label: str
    psi: StateVector
    noise: float = 0.0
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown state label {self.label!r}")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise must lie in [0, 1], got {self.noise}")

    @property
    def n_sites(self) -> int:
        return self.psi.n_sites

    @property
    def local_dim(self) -> int:
        return self.psi.local_dim

    def density(self, noise: float | None = None) -> DensityMatrix:
        return mix_white_noise(self.psi, self.noise if noise is None else noise)


def make_state(label: str, *, n: int | None = None, d: int | None = None,
               noise: float = 0.0, amplitudes=None) -> NamedState:
    """Factory used by the CLI."""
    if label == "dicke_symmetric":
        psi = dicke_symmetric(n)
    elif label == "singlet":
        psi = singlet_antisymmetric(n)
    elif label == "w_state":
        psi = w_state(n, d)
    elif label == "two_qutrit_example":
        psi = two_qutrit_example()
    elif label == "custom":
        if amplitudes is None or n is None or d is None:
            raise ValueError("custom state needs amplitudes, n and d")
        psi = StateVector.from_amplitudes(amplitudes, n, d)
    else:
        raise ValueError(f"unknown state label {label!r}")
    params = {"n": psi.n_sites, "d": psi.local_dim}
    return NamedState(label, psi, noise, params)
