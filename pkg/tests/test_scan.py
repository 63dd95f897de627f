import json
import math

import numpy as np
import pytest

from lightwitness.config import ExperimentConfig
from lightwitness.geometry import EmitterArray, TransitionTable, structure_factor
from lightwitness.hilbert import DensityMatrix, ket, random_separable_state
from lightwitness.scan import (
    CSV_COLUMNS,
    FIELD_SCHEMA_VERSION,
    STEREO_SENTINEL_RADIUS,
    AngularGrid,
    field_to_csv,
    field_to_json,
    mirror_check,
    read_field_csv,
    stereographic,
    sweep,
)
from lightwitness.states import make_state, two_qutrit_example
from lightwitness.verify import SHIPPED_CONFIGS, mirror_table, grid_dicke_check, mirror_fields, pair_on_z, random_table

SMALL = AngularGrid(np.linspace(0.05, math.pi - 0.05, 9), 2 * math.pi * np.arange(16) / 16)


@pytest.mark.parametrize("theta,phi,expected", [
    (0.0, 0.0, (0.0, 0.0)),
    (math.pi / 2, 0.0, (1.0, 0.0)),
    (2 * math.pi / 3, math.pi / 2, (0.0, math.sqrt(3))),
])
def test_stereographic_examples(theta, phi, expected):
    assert stereographic(theta, phi) == pytest.approx(expected, abs=1e-12)


def test_stereographic_south_pole_sentinel():
    x, y = stereographic(math.pi, 0.0)
    assert x == STEREO_SENTINEL_RADIUS and y == 0.0
    with pytest.raises(ValueError):
        stereographic(4.0, 0.0)


@pytest.mark.parametrize("theta,phi", [
    ([0.5, 0.2], [0.0]),
    ([0.0, 4.0], [0.0]),
    ([0.0], [0.0, 2 * math.pi]),
    ([], [0.0]),
    ([[0.0]], [0.0]),
])
def test_grid_validation(theta, phi):
    with pytest.raises(ValueError):
        AngularGrid(theta, phi)


def test_regular_grid():
    g = AngularGrid.regular(5, 4)
    assert g.shape == (5, 4)
    assert g.theta[-1] == pytest.approx(math.pi)
    assert g.phi[-1] < 2 * math.pi
    pts = list(g.points())
    assert len(pts) == 20 and pts[1] == (0.0, g.phi[1])
    assert AngularGrid.regular(1, 1).shape == (1, 1)


def mirror_sweep(channel="e_plus", grid=SMALL, state=None):
    return sweep(state or two_qutrit_example(), pair_on_z(), mirror_table(), channel, grid)


def test_sweep_one_record_per_point_and_deterministic():
    a, b = mirror_sweep(), mirror_sweep()
    assert len(a.points) == SMALL.shape[0] * SMALL.shape[1]
    assert [p.row() for p in a.points] == [p.row() for p in b.points]
    assert [(p.theta, p.phi) for p in a.points] == list(SMALL.points())
    assert a.values().shape == SMALL.shape
    assert a.global_minimum().breakdown.W == a.values().min()


def test_sweep_dimension_checks():
    with pytest.raises(ValueError):
        sweep(two_qutrit_example(), EmitterArray([[0, 0, 0]], 3), mirror_table(), "e_plus", SMALL)
    with pytest.raises(TypeError):
        sweep("not a state", pair_on_z(), mirror_table(), "e_plus", SMALL)


def test_separable_state_never_violates_anywhere():
    rho = DensityMatrix(np.outer(ket([1, 1], 3), ket([1, 1], 3)), 2, 3)
    fld = sweep(rho, pair_on_z(), mirror_table(), "e_plus", SMALL)
    assert fld.values().min() >= -1e-9
    assert fld.violating_fraction() == 0.0
    mixed = random_separable_state(3, 2, 3, n_terms=4)
    assert sweep(mixed, pair_on_z(), random_table(np.random.default_rng(3), 3), "e_minus", SMALL).values().min() >= -1e-9


def test_case_iii_field_has_both_signs():
    cfg = ExperimentConfig.load(SHIPPED_CONFIGS / "two_qutrit_ez_mixed_minus.yaml")
    fld = sweep(cfg.state(), cfg.array(), cfg.table(), cfg.channel_spec(), AngularGrid.regular(17, 24))
    vals = fld.values()
    assert vals.min() < -1e-9 and vals.max() > 1e-9
    assert 0.0 < fld.violating_fraction() < 1.0


def test_dicke_violation_tracks_structure_factor():
    agree, total = grid_dicke_check(2)
    assert agree == total
    agree, total = grid_dicke_check(3, AngularGrid.regular(7, 6))
    assert agree == total


def test_dicke_qubits_detected_away_from_s_equals_n():
    # for d = 2 the Z-variance candidate mirrors w1, so W < 0 unless S = N
    array = EmitterArray.linear_chain(2, 1.3, 2)
    fld = sweep(make_state("dicke_symmetric", n=2), array, TransitionTable.all_allowed(2, (1.0, 0.0, 0.0)),
                "e_plus", AngularGrid.regular(9, 4))
    for p in fld.points:
        c = p.breakdown.candidates()
        assert c["w2_Z"] == pytest.approx(-c["w1"], abs=1e-12)
        s = structure_factor(array, p.direction)
        assert p.breakdown.W == pytest.approx(-abs(s - 2.0), abs=1e-12)


def test_blind_triple_is_channel_independent_across_sweep():
    fp, fz = mirror_sweep("e_plus"), mirror_sweep("e_z")
    for p, q in zip(fp.points, fz.points):
        a = [p.breakdown.candidates()[k] for k in ("w1", "w2_Z", "w3_Z")]
        b = [q.breakdown.candidates()[k] for k in ("w1", "w2_Z", "w3_Z")]
        assert np.allclose(a, b, atol=1e-10)


def test_grid_refinement_is_stable():
    # refining the grid only adds points; shared directions give identical values
    coarse = AngularGrid(np.linspace(0.1, 3.0, 5), 2 * math.pi * np.arange(8) / 8)
    fine = AngularGrid(np.linspace(0.1, 3.0, 9), 2 * math.pi * np.arange(16) / 16)
    c, f = mirror_sweep(grid=coarse), mirror_sweep(grid=fine)
    assert np.allclose(c.values(), f.values()[::2, ::2], atol=1e-14)
    assert f.values().min() <= c.values().min() + 1e-14


def test_mirror_check_two_qutrit_example():
    rep = mirror_check(*mirror_fields(two_qutrit_example(), pair_on_z(), mirror_table(), SMALL))
    assert rep.passed(1e-9)
    assert rep.compared > 0.8 * len(SMALL.theta) * len(SMALL.phi)


def test_mirror_check_single_transition():
    table = TransitionTable(3, {(1, 2): [1.0, 0.0, 0.0]})
    rep = mirror_check(*mirror_fields(two_qutrit_example(), pair_on_z(), table, SMALL))
    assert rep.passed(1e-9)


def test_mirror_check_random_xz_configurations():
    rng = np.random.default_rng(20)
    psi = two_qutrit_example()
    grid = AngularGrid(np.linspace(0.05, math.pi - 0.05, 5), 2 * math.pi * np.arange(8) / 8)
    for _ in range(20):
        pos = rng.uniform(-10, 10, size=(2, 3))
        pos[:, 1] = 0.0
        rep = mirror_check(*mirror_fields(psi, EmitterArray(pos, 3), random_table(rng, 3, False, plane="xz"), grid))
        assert rep.passed(1e-9)


def test_mirror_check_rejects_bad_inputs():
    fp, fm = mirror_fields(two_qutrit_example(), pair_on_z(), mirror_table(), SMALL)
    with pytest.raises(ValueError, match="grids"):
        mirror_check(fp, mirror_sweep("e_minus", AngularGrid.regular(3, 4)))
    with pytest.raises(ValueError, match="e_plus"):
        mirror_check(fp, fp)
    complex_table = TransitionTable(3, {(1, 2): [1.0, 1j, 0.0], (1, 3): [0.0, 0.0, 1.0]})
    cp, cm = mirror_fields(two_qutrit_example(), pair_on_z(), complex_table, SMALL)
    with pytest.raises(ValueError, match="real"):
        mirror_check(cp, cm)


def test_csv_round_trip_and_header():
    fld = mirror_sweep(grid=AngularGrid.regular(3, 4))
    text = field_to_csv(fld, {"tool": "lightwitness", "seed": 0})
    lines = text.splitlines()
    assert lines[0] == "# tool: lightwitness"
    assert lines[2] == ",".join(CSV_COLUMNS)
    rows = read_field_csv(text)
    assert len(rows) == 12
    for row, pt in zip(rows, fld.points):
        assert row["W"] == pt.breakdown.W
        assert row["min_label"] == pt.breakdown.min_label
        assert row["W"] == min(row[k] for k in CSV_COLUMNS[4:-2])


def test_json_document():
    fld = mirror_sweep(grid=AngularGrid.regular(2, 3))
    doc = json.loads(field_to_json(fld, {"seed": 1}))
    assert doc["schema_version"] == FIELD_SCHEMA_VERSION
    assert doc["columns"] == list(CSV_COLUMNS)
    assert len(doc["records"]) == 6
    assert doc["provenance"] == {"seed": 1}
    assert set(doc["records"][0]) == set(CSV_COLUMNS)


def test_degenerate_directions_are_recorded():
    # dipole along z seen along z: zeta vanishes at the pole
    table = TransitionTable(3, {(1, 2): [0.0, 0.0, 1.0]})
    fld = sweep(two_qutrit_example(), pair_on_z(), table, "e_plus", AngularGrid([0.0, 1.0], [0.0]))
    assert fld.points[0].breakdown.warnings
    assert not fld.points[1].breakdown.warnings
    assert fld.warnings


def test_field_point_geometry():
    fld = mirror_sweep(grid=AngularGrid.regular(3, 2))
    for p in fld.points:
        assert np.allclose(p.breakdown.direction, p.direction)
        assert np.allclose(p.optical_phases, pair_on_z().optical_phases(p.direction))
        assert (p.x, p.y) == stereographic(p.theta, p.phi)


def test_named_state_accepted():
    fld = sweep(make_state("two_qutrit_example", n=2, d=3, noise=0.2), pair_on_z(), mirror_table(), "e_plus",
                AngularGrid.regular(2, 2))
    assert len(fld.points) == 4
