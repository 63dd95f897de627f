"""Far-field entanglement witness: moments, the seven candidates and their
minimum.

Two evaluation routes share one :class:`MomentSet` contract:

* ``dense`` materializes every collective operator as a ``d**N`` matrix and
  takes traces (slow, used as the oracle);
* ``reduced`` (default) only needs one- and two-site reduced density
  matrices plus per-atom phase coefficients, and runs through the compiled
  kernel in :mod:`lightwitness.kernels`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import DetectionChannel, EmitterArray, TransitionTable, all_pairs
from .hilbert import DensityMatrix, expectation, reduced_density_matrix
from .loos import LooFamily, build_loos, collective_quadratures

FAMILIES = ("X", "Y", "Z")
CANDIDATES = ("w1", "w2_X", "w2_Y", "w2_Z", "w3_X", "w3_Y", "w3_Z")
VARIANCE_CLAMP = -1e-12
VARIANCE_FAIL = -1e-10
DETECTION_TOL = 1e-9


class NumericalFailure(ArithmeticError):
    """A computed quantity violated a hard physical bound."""


@dataclass(frozen=True)
class QuadratureMoments:
    """Moments of one family, indexed by ``mu`` within the family."""

    mean: np.ndarray
    second: np.ndarray
    local: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        return self.second - self.mean**2

    @property
    def modified_variance(self) -> np.ndarray:
        return self.variance - self.local

    @property
    def modified_second(self) -> np.ndarray:
        return self.second - self.local


@dataclass(frozen=True)
class MomentSet:
    x: QuadratureMoments
    y: QuadratureMoments
    z: QuadratureMoments
    n_sites: int
    local_dim: int
    warnings: tuple = ()

    def __getitem__(self, family: str) -> QuadratureMoments:
        try:
            return {"X": self.x, "Y": self.y, "Z": self.z}[family]
        except KeyError:
            raise KeyError(f"family must be one of {FAMILIES}, got {family!r}") from None


@dataclass(frozen=True)
class ReducedState:
    """The one- and two-site data the witness needs, for every pair.

    ``lam[t, eta] = <|a><b|>``, ``pop[t, eta] = <|a><a| + |b><b|>``,
    ``pp[t, i, j] = <|a><b| x |a><b|>``, ``pq[t, i, j] = <|a><b| x |b><a|>``,
    ``zmean[b, eta] = <|b><b|>``, ``zz[b, i, j] = <|b><b| x |b><b|>``.
    Two-site arrays have zero diagonals.  All fields are linear in rho.
    """

    lam: np.ndarray
    pop: np.ndarray
    pp: np.ndarray
    pq: np.ndarray
    zmean: np.ndarray
    zz: np.ndarray
    n_sites: int
    local_dim: int

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> "ReducedState":
        n, d = rho.n_sites, rho.local_dim
        rho1 = np.stack([reduced_density_matrix(rho, [eta + 1]) for eta in range(n)])
        rho2 = np.zeros((n, n, d, d, d, d), dtype=np.complex128)
        for i in range(n):
            for j in range(i + 1, n):
                r = reduced_density_matrix(rho, [i + 1, j + 1]).reshape(d, d, d, d)
                rho2[i, j] = r
                rho2[j, i] = r.transpose(1, 0, 3, 2)
        return cls._from_marginals(rho1, rho2, n, d)

    @classmethod
    def maximally_mixed(cls, n: int, d: int) -> "ReducedState":
        rho1 = np.broadcast_to(np.eye(d) / d, (n, d, d)).astype(np.complex128)
        two = (np.eye(d * d) / d**2).reshape(d, d, d, d)
        rho2 = np.zeros((n, n, d, d, d, d), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                if i != j:
                    rho2[i, j] = two
        return cls._from_marginals(rho1, rho2, n, d)

    @classmethod
    def _from_marginals(cls, rho1, rho2, n, d):
        pairs = [(a - 1, b - 1) for a, b in all_pairs(d)]
        lam = np.array([rho1[:, b, a] for a, b in pairs]).reshape(len(pairs), n)
        pop = np.array([(rho1[:, a, a] + rho1[:, b, b]).real for a, b in pairs]).reshape(len(pairs), n)
        pp = np.array([rho2[:, :, b, b, a, a] for a, b in pairs]).reshape(len(pairs), n, n)
        pq = np.array([rho2[:, :, b, a, a, b] for a, b in pairs]).reshape(len(pairs), n, n)
        zmean = np.array([rho1[:, b, b].real for b in range(d)])
        zz = np.array([rho2[:, :, b, b, b, b].real for b in range(d)])
        return cls(lam, pop, pp, pq, zmean, zz, n, d)

    def blend(self, other: "ReducedState", weight: float) -> "ReducedState":
        """``weight * self + (1 - weight) * other``."""
        w = weight

        def mix(a, b):
            return w * a + (1.0 - w) * b

        return ReducedState(mix(self.lam, other.lam), mix(self.pop, other.pop),
                            mix(self.pp, other.pp), mix(self.pq, other.pq),
                            mix(self.zmean, other.zmean), mix(self.zz, other.zz),
                            self.n_sites, self.local_dim)


def _check_variances(ms: MomentSet) -> MomentSet:
    notes = list(ms.warnings)
    fams = {}
    for name in FAMILIES:
        q = ms[name]
        var = q.variance
        if np.any(var < VARIANCE_FAIL):
            raise NumericalFailure(f"variance of {name} is {var.min():.3g} < {VARIANCE_FAIL}")
        low = var < VARIANCE_CLAMP
        if np.any(low):
            # raise <O^2> so that the variance sits exactly at the clamp
            second = np.where(low, q.mean**2 + VARIANCE_CLAMP, q.second)
            notes.append(f"clamped {int(low.sum())} roundoff-negative {name} variance(s) to {VARIANCE_CLAMP}")
            warnings.warn(notes[-1], RuntimeWarning, stacklevel=3)
            q = QuadratureMoments(q.mean, second, q.local)
        fams[name] = q
    return MomentSet(fams["X"], fams["Y"], fams["Z"], ms.n_sites, ms.local_dim, tuple(notes))


def _z_moments(red: ReducedState) -> QuadratureMoments:
    mean = red.zmean.sum(axis=1)
    local = mean.copy()
    second = local + red.zz.sum(axis=(1, 2))
    return QuadratureMoments(mean, second, local)


def moments_from_reduced(red: ReducedState, coefficients: np.ndarray) -> list[MomentSet]:
    """Moments for a batch of directions.

    ``coefficients`` has shape ``(G, T, N)`` (or ``(T, N)`` for one
    direction) holding ``exp(-i R.r_eta) u_t``.
    """
    coeff = np.asarray(coefficients, dtype=np.complex128)
    if coeff.ndim == 2:
        coeff = coeff[None]
    if coeff.shape[1:] != red.lam.shape:
        raise ValueError(f"coefficient shape {coeff.shape[1:]} does not match state {red.lam.shape}")
    mx, my, cx, cy = kernels.offdiag_moments(coeff, red.lam, red.pp, red.pq)
    local = 0.5 * red.pop.sum(axis=1)
    z = _z_moments(red)
    out = []
    for g in range(coeff.shape[0]):
        ms = MomentSet(QuadratureMoments(mx[g], local + cx[g], local),
                       QuadratureMoments(my[g], local + cy[g], local),
                       z, red.n_sites, red.local_dim)
        out.append(_check_variances(ms))
    return out


def _dense_moments(rho: DensityMatrix, family: LooFamily) -> MomentSet:
    xs, ys, zs = collective_quadratures(family)
    fams = []
    for ops in (xs, ys, zs):
        mean, second, local = [], [], []
        for op in ops:
            m = op.dense()
            mean.append(expectation(rho, m).real)
            second.append(expectation(rho, m @ m).real)
            local.append(expectation(rho, op.local_square_sum()).real)
        fams.append(QuadratureMoments(np.array(mean), np.array(second), np.array(local)))
    return MomentSet(*fams, rho.n_sites, rho.local_dim)


def compute_moments(rho, family: LooFamily, method: str = "reduced") -> MomentSet:
    """First moments, second moments and local quadratic terms for every ``mu``.

    ``rho`` is a :class:`DensityMatrix` (either method) or a precomputed
    :class:`ReducedState` (reduced method only).
    """
    if isinstance(rho, ReducedState):
        if method != "reduced":
            raise ValueError("a ReducedState can only be evaluated with method='reduced'")
        red = rho
    else:
        if (rho.n_sites, rho.local_dim) != (family.n_sites, family.local_dim):
            raise ValueError(
                f"state has (N, d) = ({rho.n_sites}, {rho.local_dim}), LOOs have "
                f"({family.n_sites}, {family.local_dim})")
        if method == "dense":
            return _check_variances(_dense_moments(rho, family))
        if method != "reduced":
            raise ValueError(f"unknown method {method!r}")
        red = ReducedState.from_density(rho)
    if (red.n_sites, red.local_dim) != (family.n_sites, family.local_dim):
        raise ValueError("state and LOO family dimensions differ")
    return moments_from_reduced(red, family.coefficients)[0]


def w1(moments: MomentSet, n: int, d: int) -> float:
    total = sum(float(moments[f].variance.sum()) for f in FAMILIES)
    return total - (d - 1) * n


def w2(moments: MomentSet, variance_family: str, n: int) -> float:
    """``(N-1) sum dA_bar^2 - sum <B_bar^2> - sum <C_bar^2> + N(N-1)`` with
    ``A = variance_family``."""
    others = [f for f in FAMILIES if f != variance_family]
    if len(others) != 2:
        raise ValueError(f"variance_family must be one of {FAMILIES}")
    a = moments[variance_family].modified_variance.sum()
    bc = sum(moments[f].modified_second.sum() for f in others)
    return float((n - 1) * a - bc + n * (n - 1))


def w3(moments: MomentSet, second_moment_family: str, n: int) -> float:
    """``(N-1)(sum dA_bar^2 + sum dB_bar^2) - sum <C_bar^2> + N(N-1)`` with
    ``C = second_moment_family``."""
    others = [f for f in FAMILIES if f != second_moment_family]
    if len(others) != 2:
        raise ValueError(f"second_moment_family must be one of {FAMILIES}")
    ab = sum(moments[f].modified_variance.sum() for f in others)
    c = moments[second_moment_family].modified_second.sum()
    return float((n - 1) * ab - c + n * (n - 1))


@dataclass(frozen=True)
class WitnessBreakdown:
    w1: float
    w2: dict
    w3: dict
    W: float
    min_label: str
    direction: np.ndarray | None = None
    channel_label: str = ""
    warnings: tuple = field(default=(), compare=False)

    def candidates(self) -> dict:
        out = {"w1": self.w1}
        out.update({f"w2_{f}": self.w2[f] for f in FAMILIES})
        out.update({f"w3_{f}": self.w3[f] for f in FAMILIES})
        return out

    def detected(self, tolerance: float = DETECTION_TOL) -> bool:
        return self.W < -tolerance

    def to_dict(self) -> dict:
        return {
            **self.candidates(),
            "W": self.W,
            "min_label": self.min_label,
            "direction": None if self.direction is None else [float(v) for v in self.direction],
            "channel": self.channel_label,
            "warnings": list(self.warnings),
        }


def breakdown_from_moments(ms: MomentSet, direction=None, channel_label: str = "",
                           extra_warnings=()) -> WitnessBreakdown:
    n, d = ms.n_sites, ms.local_dim
    vals = {
        "w1": w1(ms, n, d),
        **{f"w2_{f}": w2(ms, f, n) for f in FAMILIES},
        **{f"w3_{f}": w3(ms, f, n) for f in FAMILIES},
    }
    label = min(CANDIDATES, key=lambda k: (vals[k], CANDIDATES.index(k)))
    return WitnessBreakdown(
        vals["w1"],
        {f: vals[f"w2_{f}"] for f in FAMILIES},
        {f: vals[f"w3_{f}"] for f in FAMILIES},
        vals[label], label, direction, channel_label,
        tuple(extra_warnings) + tuple(ms.warnings),
    )


def witness_min(rho, family: LooFamily, method: str = "reduced") -> WitnessBreakdown:
    """All seven candidates and their minimum ``W``."""
    ms = compute_moments(rho, family, method)
    return breakdown_from_moments(ms, family.direction, family.channel_label, family.warnings)


def polarization_blind_values(rho, family: LooFamily, method: str = "reduced") -> tuple[float, float, float]:
    """``(w1, w2 with Z variances, w3 with Z second moments)``."""
    ms = compute_moments(rho, family, method)
    n, d = ms.n_sites, ms.local_dim
    return w1(ms, n, d), w2(ms, "Z", n), w3(ms, "Z", n)


def noise_threshold(state, array: EmitterArray, table: TransitionTable, channel: DetectionChannel,
                    p_resolution: float = 1e-9, tolerance: float = DETECTION_TOL,
                    coarse_steps: int = 64) -> float | None:
    """Smallest white-noise fraction at which the witness stops detecting.

    ``state`` is a :class:`~lightwitness.states.NamedState` or a
    :class:`~lightwitness.hilbert.StateVector`.  Returns ``None`` when the
    noiseless state is already undetected at this direction and channel.
    The first sign change on a ``1/coarse_steps`` grid is refined by
    bisection down to ``p_resolution``.
    """
    if p_resolution <= 0:
        raise ValueError("p_resolution must be positive")
    psi = getattr(state, "psi", state)
    n, d = psi.n_sites, psi.local_dim
    family = build_loos(array, table, channel)
    coeff = family.coefficients
    pure = ReducedState.from_density(psi.projector())
    mixed = ReducedState.maximally_mixed(n, d)

    def W(p):
        ms = moments_from_reduced(mixed.blend(pure, p), coeff)[0]
        return breakdown_from_moments(ms).W

    if W(0.0) >= -tolerance:
        return None
    lo = 0.0
    hi = None
    for k in range(1, coarse_steps + 1):
        p = k / coarse_steps
        if W(p) >= -tolerance:
            hi = p
            break
        lo = p
    if hi is None:
        return 1.0
    while hi - lo > p_resolution:
        mid = 0.5 * (lo + hi)
        if W(mid) >= -tolerance:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
