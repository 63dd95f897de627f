"""Closed-form reference values used to cross-check the numerical engine."""
from __future__ import annotations

import math
from dataclasses import dataclass

LATTICE_LIMIT_TOL = 1e-9


@dataclass(frozen=True)
class ThresholdResult:
    p_star: float
    note: str = ""

    def __post_init__(self):
        if not 0.0 <= self.p_star <= 1.0:
            raise ValueError(f"p_star must lie in [0, 1], got {self.p_star}")

    def __float__(self):
        return self.p_star


def sym_noise_threshold(n: int, s: float) -> ThresholdResult:
    """Largest white-noise fraction for the symmetric Dicke state,
    ``(N - S) / ((N - 1) + (N - S))``; zero when ``S >= N``."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if s >= n:
        return ThresholdResult(0.0, "no violation window: S >= N")
    return ThresholdResult((n - s) / ((n - 1) + (n - s)), "destructive interference favoured")


def asym_noise_threshold(n: int, s: float) -> ThresholdResult:
    """Singlet counterpart, ``(S - N) / ((N - 1) + (S - N))``; zero when ``S <= N``."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if s <= n:
        return ThresholdResult(0.0, "no violation window: S <= N")
    return ThresholdResult((s - n) / ((n - 1) + (s - n)), "constructive interference favoured")


def w_state_violation_bound(n: int) -> float:
    """``N**2 / (2N - 1)``.  Meaningless for ``n = 1`` (returns 1)."""
    return n * n / (2 * n - 1)


def w_state_w1_bound(n: int, d: int) -> float:
    """Structure factor below which ``w1`` is negative for the qudit W state.

    Root of ``2(N-1) S + d (N**2 + S - 2 N S) = 0``; tends to
    :func:`w_state_violation_bound` as ``d -> infinity``.
    """
    return d * n * n / (d * (2 * n - 1) - 2 * (n - 1))


def w_state_w1(n: int, d: int, s: float) -> float:
    """Closed-form ``w1`` of the noiseless qudit W state at structure factor ``s``."""
    return -(2 * (n - 1) * s + d * (n * n + s - 2 * n * s)) / ((d - 1) * n * n)


def two_qutrit_closed_form(phase1: float, phase2: float, phi12: float, phi13: float,
                           handedness: int) -> float:
    """Witness of ``(|11> + |22> + |13>)/sqrt(3)`` measured in one circular channel.

    ``phase1 = R.(r1 + r2)``, ``phase2 = 2 R.r2``; ``handedness`` is +1 for
    ``e_plus`` and -1 for ``e_minus``.
    """
    if handedness not in (1, -1):
        raise ValueError("handedness must be +1 or -1")
    s = handedness
    return (-4.0 / 3.0 * math.cos(phase1 - s * 2 * phi12)
            + 1.0 / 9.0 * math.cos(phase2 - s * 2 * phi13)
            + 5.0 / 9.0)


def linear_array_structure_factor(n: int, kz_a: float) -> float:
    """``|(1 - exp(i N x)) / (1 - exp(i x))|**2`` for a regular chain.

    Evaluated as ``(sin(N x/2) / sin(x/2))**2``, which is the same ratio
    without the cancellation in the numerator; the constructive limit
    ``|1 - exp(i x)| < 1e-9`` returns ``N**2``.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    half = math.sin(kz_a / 2.0)
    if 2.0 * abs(half) < LATTICE_LIMIT_TOL:
        return float(n * n)
    return (math.sin(n * kz_a / 2.0) / half) ** 2
