"""Built-in property suites run by ``lightwitness verify``.

Every suite is seeded, returns a :class:`SuiteResult` and never raises on
a failed property; exceptions inside a suite are reported as failures.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic
from .geometry import (
    DetectionChannel,
    EmitterArray,
    TransitionTable,
    all_pairs,
    direction_from_angles,
    structure_factor,
)
from .hilbert import StateVector, random_separable_state
from .loos import DegenerateZetaWarning, basis_deviation, build_loos
from .scan import AngularGrid, mirror_check, sweep
from .states import (
    dicke_symmetric,
    make_state,
    singlet_antisymmetric,
    two_qutrit_example,
)
from .witness import CANDIDATES, compute_moments, noise_threshold, witness_min

BASIS_TOL = 1e-12
SEPARABLE_TOL = 1e-9
INVARIANCE_TOL = 1e-10
MIRROR_TOL = 1e-9
THRESHOLD_TOL = 1e-6
MOMENT_TOL = 1e-12
LATTICE_TOL = 1e-10
CANCEL_TOL = 1e-12
INV_SQRT2 = 1.0 / math.sqrt(2.0)

MIRROR_DIPOLES = {(1, 2): np.array([INV_SQRT2, 0.0, INV_SQRT2]),
                  (1, 3): np.array([INV_SQRT2, 0.0, -INV_SQRT2])}
PAIR_SEPARATION = 15.0


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    failures: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<14} {self.detail}"


# ---- random draws ---------------------------------------------------------

def random_unit(rng, complex_valued: bool = True) -> np.ndarray:
    v = rng.normal(size=3) + (1j * rng.normal(size=3) if complex_valued else 0.0)
    return np.asarray(v / np.linalg.norm(v), dtype=np.complex128)


def random_direction(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_table(rng, d: int, complex_valued: bool = True, plane: str | None = None) -> TransitionTable:
    """Random subset (at least one) of allowed transitions with random dipoles.

    ``plane="xz"`` keeps every dipole in the xz plane.
    """
    pairs = all_pairs(d)
    keep = [p for p in pairs if rng.random() < 0.7] or [pairs[rng.integers(len(pairs))]]
    dip = {}
    for p in keep:
        v = random_unit(rng, complex_valued)
        if plane == "xz":
            v = np.array([v[0].real, 0.0, v[2].real])
            v /= np.linalg.norm(v)
        dip[p] = v
    return TransitionTable(d, dip)


def random_channel(rng, direction, table: TransitionTable, complex_valued: bool = True) -> DetectionChannel:
    return DetectionChannel(direction, {p: random_unit(rng, complex_valued) for p in table.dipoles})


def random_array(rng, n: int, d: int, scale: float = 10.0) -> EmitterArray:
    return EmitterArray(rng.uniform(-scale, scale, size=(n, 3)), d)


def mirror_table() -> TransitionTable:
    return TransitionTable(3, MIRROR_DIPOLES)


def pair_on_z(separation: float = PAIR_SEPARATION, d: int = 3) -> EmitterArray:
    return EmitterArray([[0.0, 0.0, 0.0], [0.0, 0.0, separation]], d)


# ---- suites ---------------------------------------------------------------

def suite_loo_basis(seed: int = 0, draws: int = 200, fault: float = 0.0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    for k in range(draws):
        d = int(rng.choice([2, 3, 4]))
        n = int(rng.integers(1, 4))
        table = random_table(rng, d)
        direction = random_direction(rng)
        fam = build_loos(random_array(rng, n, d), table, random_channel(rng, direction, table),
                         _minus_phase_fault=fault)
        for eta in range(1, n + 1):
            dev = max(basis_deviation(fam.at_atom(eta)))
            worst = max(worst, dev)
            if dev >= BASIS_TOL:
                failures.append(f"draw {k} atom {eta}: deviation {dev:.3g}")
    return SuiteResult("loo_basis", not failures,
                       f"{draws} draws, max deviation {worst:.2e} (tol {BASIS_TOL:g})", failures)


def suite_separability(seed: int = 0, trials: int = 240) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = math.inf
    failures = []
    shapes = [(n, d) for n in (2, 3) for d in (2, 3, 4)]
    for k in range(trials):
        n, d = shapes[k % len(shapes)]
        rho = random_separable_state(rng, n, d, n_terms=int(rng.integers(1, 4)))
        table = random_table(rng, d)
        direction = random_direction(rng)
        fam = build_loos(random_array(rng, n, d), table, random_channel(rng, direction, table))
        bd = witness_min(rho, fam)
        worst = min(worst, bd.W)
        if bd.W < -SEPARABLE_TOL:
            failures.append(f"trial {k} (N={n}, d={d}): {bd.min_label} = {bd.W:.3g}")
    return SuiteResult("separability", not failures,
                       f"{trials} states, min W {worst:.3e} (bound -{SEPARABLE_TOL:g})", failures)


def _candidate_gap(a, b, keys=CANDIDATES) -> float:
    ca, cb = a.candidates(), b.candidates()
    return max(abs(ca[k] - cb[k]) for k in keys)


def _test_state(rng, n, d):
    """Random pure (entangled in general) state as a density matrix."""
    v = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
    return StateVector.from_amplitudes(v / np.linalg.norm(v), n, d).projector()


def suite_real_channels(seed: int = 0, trials: int = 60) -> SuiteResult:
    """Real dipoles and real polarizations: every candidate is channel independent."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    for k in range(trials):
        n, d = int(rng.integers(2, 4)), int(rng.integers(2, 5))
        rho = _test_state(rng, n, d)
        table = random_table(rng, d, complex_valued=False)
        array = random_array(rng, n, d)
        direction = random_direction(rng)
        a = witness_min(rho, build_loos(array, table, random_channel(rng, direction, table, False)))
        b = witness_min(rho, build_loos(array, table, random_channel(rng, direction, table, False)))
        gap = _candidate_gap(a, b)
        worst = max(worst, gap)
        if gap >= INVARIANCE_TOL:
            failures.append(f"trial {k}: gap {gap:.3g}")
    return SuiteResult("real_channels", not failures,
                       f"{trials} real channel swaps, max gap {worst:.2e} (tol {INVARIANCE_TOL:g})", failures)


def suite_blind_triple(seed: int = 0, trials: int = 60) -> SuiteResult:
    """Complex channels: the polarization-blind triple is channel independent."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    for k in range(trials):
        n, d = int(rng.integers(2, 4)), int(rng.integers(2, 5))
        rho = _test_state(rng, n, d)
        table = random_table(rng, d)
        array = random_array(rng, n, d)
        direction = random_direction(rng)
        a = witness_min(rho, build_loos(array, table, random_channel(rng, direction, table)))
        b = witness_min(rho, build_loos(array, table, random_channel(rng, direction, table)))
        gap = _candidate_gap(a, b, ("w1", "w2_Z", "w3_Z"))
        worst = max(worst, gap)
        if gap >= INVARIANCE_TOL:
            failures.append(f"trial {k}: gap {gap:.3g}")
    return SuiteResult("blind_triple", not failures,
                       f"{trials} complex channel swaps, max gap {worst:.2e} (tol {INVARIANCE_TOL:g})", failures)


def mirror_fields(state, array: EmitterArray, table: TransitionTable, grid: AngularGrid):
    return (sweep(state, array, table, "e_plus", grid),
            sweep(state, array, table, "e_minus", grid))


def suite_mirror(seed: int = 0, n_theta: int = 13, n_phi: int = 24, random_trials: int = 4) -> SuiteResult:
    """Circular mirror symmetry for the two-emitter configuration and for
    random real dipoles kept in the xz plane (so the mirror partner of every
    grid direction is also on the grid)."""
    rng = np.random.default_rng(seed)
    grid = AngularGrid(np.linspace(0.05, math.pi - 0.05, n_theta), 2 * math.pi * np.arange(n_phi) / n_phi)
    psi = two_qutrit_example()
    cases = [("mirror_xz", pair_on_z(), mirror_table())]
    for k in range(random_trials):
        pos = rng.uniform(-10, 10, size=(2, 3))
        pos[:, 1] = 0.0
        cases.append((f"random{k}", EmitterArray(pos, 3), random_table(rng, 3, False, plane="xz")))
    worst = 0.0
    failures = []
    for name, array, table in cases:
        rep = mirror_check(*mirror_fields(psi, array, table, grid))
        worst = max(worst, rep.max_discrepancy)
        if not rep.passed(MIRROR_TOL):
            failures.append(f"{name}: discrepancy {rep.max_discrepancy:.3g} over {rep.compared} points")
    return SuiteResult("mirror", not failures,
                       f"{len(cases)} configurations, max discrepancy {worst:.2e} (tol {MIRROR_TOL:g})", failures)


def dicke_setup(n: int):
    """Chain on z with spacing ``2 pi / n`` seen along z, so that S = 0."""
    array = EmitterArray.linear_chain(n, 2 * math.pi / n, n)
    table = TransitionTable.all_allowed(n, (1.0, 0.0, 0.0))
    direction = np.array([0.0, 0.0, 1.0])
    return array, table, DetectionChannel.from_spec(direction, "e_plus", table)


def singlet_setup(n: int):
    """Chain on z seen from the equator, so that S = N**2."""
    array = EmitterArray.linear_chain(n, 1.0, n)
    table = TransitionTable.all_allowed(n, (0.0, 0.0, 1.0))
    direction = np.array([1.0, 0.0, 0.0])
    return array, table, DetectionChannel.from_spec(direction, "e_z", table)


def moment_table() -> dict:
    """Selected moments of the two-qutrit example at an arbitrary direction."""
    array = pair_on_z()
    fam = build_loos(array, mirror_table(), DetectionChannel.from_spec(
        direction_from_angles(0.7, 1.1), "e_plus", mirror_table()))
    ms = compute_moments(two_qutrit_example().projector(), fam)
    pairs = all_pairs(3)
    return {
        "Z11": float(ms.z.mean[0]),
        "Z22": float(ms.z.mean[1]),
        "Z33": float(ms.z.mean[2]),
        "X13^2": float(ms.x.second[pairs.index((1, 3))]),
        "X23^2": float(ms.x.second[pairs.index((2, 3))]),
        "Z11^2": float(ms.z.second[0]),
    }


MOMENT_EXPECTED = {"Z11": 1.0, "Z22": 2 / 3, "Z33": 1 / 3, "X13^2": 4 / 6, "X23^2": 0.5, "Z11^2": 5 / 3}


def suite_analytic(seed: int = 0, dicke_sizes=(2, 3), singlet_sizes=(2, 3), lattice_trials: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    failures = []
    notes = []
    for n in dicke_sizes:
        array, table, channel = dicke_setup(n)
        s = structure_factor(array, channel.direction)
        p = noise_threshold(dicke_symmetric(n), array, table, channel)
        ref = analytic.sym_noise_threshold(n, s).p_star
        if p is None or abs(p - ref) >= THRESHOLD_TOL:
            failures.append(f"Dicke N={n}: p*={p} vs {ref:.9f}")
        notes.append(f"dicke{n}")
    for n in singlet_sizes:
        array, table, channel = singlet_setup(n)
        s = structure_factor(array, channel.direction)
        p = noise_threshold(singlet_antisymmetric(n), array, table, channel)
        ref = analytic.asym_noise_threshold(n, s).p_star
        if p is None or abs(p - ref) >= THRESHOLD_TOL:
            failures.append(f"singlet N={n}: p*={p} vs {ref:.9f}")
        notes.append(f"singlet{n}")
    got = moment_table()
    for key, val in MOMENT_EXPECTED.items():
        if abs(got[key] - val) >= MOMENT_TOL:
            failures.append(f"moment {key}: {got[key]!r} vs {val!r}")
    for _ in range(lattice_trials):
        n = int(rng.integers(1, 12))
        x = float(rng.uniform(-2 * math.pi, 2 * math.pi))
        chain = EmitterArray.linear_chain(n, x, 2)
        direct = structure_factor(chain, (0.0, 0.0, 1.0))
        closed = analytic.linear_array_structure_factor(n, x)
        if abs(direct - closed) >= LATTICE_TOL:
            failures.append(f"lattice N={n} x={x}: {direct} vs {closed}")
    for n in (2, 3, 5, 8):
        x = 2 * math.pi / n
        closed = analytic.linear_array_structure_factor(n, x)
        direct = structure_factor(EmitterArray.linear_chain(n, x, 2), (0.0, 0.0, 1.0))
        if max(closed, direct) >= CANCEL_TOL:
            failures.append(f"cancellation N={n}: closed {closed:.3g}, direct {direct:.3g}")
    return SuiteResult("analytic", not failures,
                       f"thresholds ({', '.join(notes)}), moment table, {lattice_trials} lattice draws", failures)


SHIPPED_CONFIGS = Path(__file__).parent / "configs"


def shipped_configs() -> list[Path]:
    return sorted(SHIPPED_CONFIGS.glob("*.yaml"))


def suite_configs(seed: int = 0) -> SuiteResult:
    """Every shipped config loads, round-trips and evaluates to finite values."""
    from .config import ExperimentConfig

    failures = []
    paths = shipped_configs()
    for path in paths:
        try:
            cfg = ExperimentConfig.load(path)
            if ExperimentConfig.from_text(cfg.dumps()) != cfg:
                failures.append(f"{path.name}: round trip changed the config")
            direction = cfg.direction()
            fam = build_loos(cfg.array(), cfg.table(), cfg.channel(direction))
            bd = witness_min(cfg.state().density(), fam)
            if not all(math.isfinite(v) for v in bd.candidates().values()):
                failures.append(f"{path.name}: non-finite candidate")
        except Exception as exc:  # noqa: BLE001
            failures.append(f"{path.name}: {type(exc).__name__}: {exc}")
    ok = bool(paths) and not failures
    return SuiteResult("configs", ok, f"{len(paths)} shipped configs", failures or ([] if paths else ["none found"]))


SUITES = {
    "loo_basis": suite_loo_basis,
    "separability": suite_separability,
    "real_channels": suite_real_channels,
    "blind_triple": suite_blind_triple,
    "mirror": suite_mirror,
    "analytic": suite_analytic,
    "configs": suite_configs,
}


def run_all(seed: int = 0, fault: float = 0.0) -> list[SuiteResult]:
    out = []
    for name, fn in SUITES.items():
        kwargs = {"seed": seed}
        if name == "loo_basis":
            kwargs["fault"] = fault
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateZetaWarning)
                out.append(fn(**kwargs))
        except Exception as exc:  # noqa: BLE001 - report, do not crash the gate
            out.append(SuiteResult(name, False, f"raised {type(exc).__name__}: {exc}", [str(exc)]))
    return out


def grid_dicke_check(n: int = 2, grid: AngularGrid | None = None, spacing: float = 1.3):
    """Per-direction comparison of ``w1 < 0`` with ``S < N`` for the Dicke state
    on a chain; returns ``(agree, total)``.

    Only ``w1`` follows this rule; other candidates detect the state for
    ``S > N`` as well, so ``W`` itself is negative whenever ``S != N``.
    """
    grid = grid or AngularGrid.regular(9, 8)
    array = EmitterArray.linear_chain(n, spacing, n)
    table = TransitionTable.all_allowed(n, (1.0, 0.0, 0.0))
    fld = sweep(make_state("dicke_symmetric", n=n), array, table, "e_plus", grid)
    agree = 0
    for p in fld.points:
        s = structure_factor(array, p.direction)
        agree += (p.breakdown.w1 < -SEPARABLE_TOL) == (s < n - 1e-9)
    return agree, len(fld.points)


__all__ = [
    "SuiteResult", "SUITES", "run_all", "random_table", "random_channel", "random_array",
    "random_direction", "random_unit", "mirror_table", "pair_on_z", "dicke_setup", "singlet_setup",
    "moment_table", "MOMENT_EXPECTED", "mirror_fields", "grid_dicke_check",
]
