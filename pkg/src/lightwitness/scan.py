"""Angular sweeps of the witness, stereographic maps and the circular
mirror-symmetry check."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    DetectionChannel,
    EmitterArray,
    TransitionTable,
    all_pairs,
    dipole_phase,
    direction_from_angles,
)
from .hilbert import DensityMatrix, StateVector
from .loos import unit_phases_for
from .witness import (
    DETECTION_TOL,
    ReducedState,
    WitnessBreakdown,
    breakdown_from_moments,
    moments_from_reduced,
)

CSV_COLUMNS = ("theta", "phi", "x_stereo", "y_stereo", "w1", "w2_X", "w2_Y", "w2_Z",
               "w3_X", "w3_Y", "w3_Z", "W", "min_label")
FIELD_SCHEMA_VERSION = 1
# radius emitted for theta = pi, where the projection diverges
STEREO_SENTINEL_RADIUS = 1e6
_CHUNK = 2048


@dataclass(frozen=True)
class AngularGrid:
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        th = np.array(self.theta, dtype=float, ndmin=1)
        ph = np.array(self.phi, dtype=float, ndmin=1)
        for name, a, lo, hi, closed in (("theta", th, 0.0, math.pi, True),
                                        ("phi", ph, 0.0, 2 * math.pi, False)):
            if a.ndim != 1 or a.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-D array")
            if np.any(np.diff(a) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            if a[0] < lo or (a[-1] > hi if closed else a[-1] >= hi):
                raise ValueError(f"{name} values must lie in [{lo}, {hi}{']' if closed else ')'}")
        th.flags.writeable = False
        ph.flags.writeable = False
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", ph)

    @classmethod
    def regular(cls, n_theta: int, n_phi: int) -> "AngularGrid":
        """``n_theta`` points on ``[0, pi]`` and ``n_phi`` on ``[0, 2 pi)``."""
        theta = np.linspace(0.0, math.pi, n_theta) if n_theta > 1 else np.zeros(1)
        return cls(theta, 2 * math.pi * np.arange(n_phi) / n_phi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.size, self.phi.size

    def points(self):
        """``(theta, phi)`` in row-major order (theta outer)."""
        for th in self.theta:
            for ph in self.phi:
                yield float(th), float(ph)


def stereographic(theta: float, phi: float) -> tuple[float, float]:
    """Project from the south pole: ``tan(theta/2) (cos phi, sin phi)``."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    r = STEREO_SENTINEL_RADIUS if theta >= math.pi - 1e-12 else math.tan(theta / 2.0)
    return r * math.cos(phi), r * math.sin(phi)


@dataclass(frozen=True)
class FieldPoint:
    theta: float
    phi: float
    direction: np.ndarray
    x: float
    y: float
    breakdown: WitnessBreakdown
    optical_phases: np.ndarray
    dipole_phases: dict

    def row(self) -> dict:
        out = {"theta": self.theta, "phi": self.phi, "x_stereo": self.x, "y_stereo": self.y}
        out.update(self.breakdown.candidates())
        out["W"] = self.breakdown.W
        out["min_label"] = self.breakdown.min_label
        return out


@dataclass(frozen=True)
class WitnessField:
    grid: AngularGrid
    points: tuple
    channel_spec: object
    table: TransitionTable
    array: EmitterArray
    warnings: tuple = field(default=(), compare=False)

    def values(self, key: str = "W") -> np.ndarray:
        """``(n_theta, n_phi)`` array of one column."""
        vals = [p.breakdown.W if key == "W" else p.breakdown.candidates()[key] for p in self.points]
        return np.array(vals).reshape(self.grid.shape)

    def violating_fraction(self, tolerance: float = DETECTION_TOL) -> float:
        return float(np.mean(self.values() < -tolerance))

    def global_minimum(self) -> FieldPoint:
        return min(self.points, key=lambda p: p.breakdown.W)

    def rows(self) -> list[dict]:
        return [p.row() for p in self.points]


def _density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.projector()
    if hasattr(state, "density"):
        return state.density()
    raise TypeError(f"cannot interpret {type(state).__name__} as a quantum state")


def _dipole_phases(table: TransitionTable, direction) -> dict:
    out = {}
    if not table.all_real:
        return out
    for pair, dip in table.dipoles.items():
        try:
            out[pair] = dipole_phase(direction, dip.real)
        except ValueError:
            out[pair] = float("nan")
    return out


def sweep(state, array: EmitterArray, table: TransitionTable, channel_spec,
          grid: AngularGrid) -> WitnessField:
    """Evaluate :func:`~lightwitness.witness.witness_min` at every grid direction.

    ``channel_spec`` is a preset name used for all allowed transitions or a
    mapping ``(alpha, beta) -> preset or vector``.  Output order is the grid
    order (theta outer, phi inner).
    """
    rho = _density(state)
    if (rho.n_sites, rho.local_dim) != (array.n_sites, array.local_dim):
        raise ValueError("state and emitter array dimensions differ")
    if table.local_dim != array.local_dim:
        raise ValueError("transition table and emitter array dimensions differ")
    red = ReducedState.from_density(rho)
    pairs = all_pairs(array.local_dim)

    meta = []
    coeffs = np.empty((grid.shape[0] * grid.shape[1], len(pairs), array.n_sites), dtype=np.complex128)
    for g, (th, ph) in enumerate(grid.points()):
        direction = direction_from_angles(th, ph)
        channel = DetectionChannel.from_spec(direction, channel_spec, table)
        u, degenerate = unit_phases_for(table, channel)
        phases = array.optical_phases(direction)
        coeffs[g] = u[:, None] * np.exp(-1j * phases)[None, :]
        notes = tuple(f"|zeta| < 1e-12 for transition {p}; treated as detection-forbidden"
                      for p in degenerate)
        meta.append((th, ph, direction, phases, notes, channel.label))

    points = []
    all_notes = []
    for start in range(0, len(meta), _CHUNK):
        moments = moments_from_reduced(red, coeffs[start:start + _CHUNK])
        for ms, (th, ph, direction, phases, notes, label) in zip(moments, meta[start:start + _CHUNK]):
            bd = breakdown_from_moments(ms, direction, label, notes)
            x, y = stereographic(th, ph)
            points.append(FieldPoint(th, ph, direction, x, y, bd, phases,
                                     _dipole_phases(table, direction)))
            all_notes.extend(bd.warnings)
    return WitnessField(grid, tuple(points), channel_spec, table, array, tuple(dict.fromkeys(all_notes)))


@dataclass(frozen=True)
class MirrorReport:
    max_discrepancy: float
    compared: int
    unmatched: int

    def passed(self, tol: float = 1e-9) -> bool:
        return self.compared > 0 and self.max_discrepancy < tol


_MIRROR_PRESET = {"e_plus": "e_minus", "e_minus": "e_plus", "e_z": "e_z"}


def _mirror_spec_ok(plus_spec, minus_spec, table: TransitionTable) -> bool:
    def per_pair(spec):
        if isinstance(spec, str):
            return {p: spec for p in table.dipoles}
        return {tuple(k): v for k, v in dict(spec).items()}

    a, b = per_pair(plus_spec), per_pair(minus_spec)
    if set(a) != set(b):
        return False
    return all(isinstance(a[p], str) and _MIRROR_PRESET.get(a[p]) == b[p] for p in a) and \
        any(a[p] == "e_plus" for p in a)


def _phase_features(optical, dip, sign):
    angles = np.concatenate([optical, sign * dip])
    return np.concatenate([np.cos(angles), np.sin(angles)])


def mirror_check(field_plus: WitnessField, field_minus: WitnessField,
                 match_tol: float = 1e-7) -> MirrorReport:
    """Compare the ``e_plus`` field with the ``e_minus`` field under negation
    of every dipole phase.

    Each point of ``field_plus`` is paired with the ``field_minus`` point that
    has the same optical phases and negated per-transition dipole phases;
    every candidate and ``W`` are compared.  Points without a partner on the
    grid are counted in ``unmatched``.
    """
    if field_plus.grid.shape != field_minus.grid.shape or not (
            np.allclose(field_plus.grid.theta, field_minus.grid.theta)
            and np.allclose(field_plus.grid.phi, field_minus.grid.phi)):
        raise ValueError("fields are on different grids")
    table = field_plus.table
    if not table.all_real or not field_minus.table.all_real:
        raise ValueError("mirror symmetry requires real dipole vectors")
    if not _mirror_spec_ok(field_plus.channel_spec, field_minus.channel_spec, table):
        raise ValueError("fields must use e_plus / e_minus channels (e_z allowed on either side)")

    pairs = sorted(table.dipoles)

    def dips(p):
        return np.array([p.dipole_phases[k] for k in pairs])

    cand_minus, feats = [], []
    for p in field_minus.points:
        dp = dips(p)
        if np.all(np.isfinite(dp)):
            cand_minus.append(p)
            feats.append(_phase_features(p.optical_phases, dp, 1.0))
    if not feats:
        return MirrorReport(float("nan"), 0, len(field_plus.points))
    tree = cKDTree(np.array(feats))

    worst, compared, unmatched = 0.0, 0, 0
    for p in field_plus.points:
        dp = dips(p)
        if not np.all(np.isfinite(dp)):
            unmatched += 1
            continue
        dist, idx = tree.query(_phase_features(p.optical_phases, dp, -1.0))
        if dist > match_tol:
            unmatched += 1
            continue
        q = cand_minus[idx]
        a = {**p.breakdown.candidates(), "W": p.breakdown.W}
        b = {**q.breakdown.candidates(), "W": q.breakdown.W}
        worst = max(worst, max(abs(a[k] - b[k]) for k in a))
        compared += 1
    return MirrorReport(worst, compared, unmatched)


def field_to_csv(fld: WitnessField, provenance: dict | None = None) -> str:
    buf = io.StringIO()
    for key, val in (provenance or {}).items():
        buf.write(f"# {key}: {val}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in fld.rows():
        writer.writerow({k: (repr(float(v)) if k != "min_label" else v) for k, v in row.items()})
    return buf.getvalue()


def field_to_json(fld: WitnessField, provenance: dict | None = None) -> str:
    doc = {
        "schema_version": FIELD_SCHEMA_VERSION,
        "provenance": provenance or {},
        "columns": list(CSV_COLUMNS),
        "grid": {"theta": fld.grid.theta.tolist(), "phi": fld.grid.phi.tolist()},
        "records": [{k: row[k] for k in CSV_COLUMNS} for row in fld.rows()],
        "warnings": list(fld.warnings),
    }
    return json.dumps(doc, indent=1)


def read_field_csv(text: str) -> list[dict]:
    """Parse rows written by :func:`field_to_csv` (provenance lines skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    for row in rows:
        for k in CSV_COLUMNS:
            if k != "min_label":
                row[k] = float(row[k])
    return rows
