import json
import math

import numpy as np
import pytest

from impurity_decay.geometry import (
    EmitterArray,
    GeometryError,
    LatticeKind,
    LatticeSpec,
    Placement,
    build_lattice,
    nearest_neighbor_stats,
)
from impurity_decay.geometry.lattice import patch_shape
from impurity_decay.geometry.neighbors import merge_distances
from impurity_decay.geometry.spacing import (
    equal_distance_spacing,
    lattice_spacing,
    plaquette_distances_oblique,
    rescaled_spacing,
)

A_SQ = 0.15
THETA = 0.3 * math.pi
# 50-digit evaluations of the closed forms and of explicit lattice-vector norms
A_OBL_ORACLE = 0.20461933693462865072
D_OBL_ORACLE = (0.20461933693462865072, 0.25292340996213445383,
                0.21213203435596425732, 0.40826296514487085814)


def _spec(kind, placement="interstitial", **kw):
    kind = LatticeKind(kind)
    theta = THETA if kind is LatticeKind.OBLIQUE else None
    scale = 1.5 if kind is LatticeKind.RECTANGULAR else None
    a = lattice_spacing(kind, placement, A_SQ, theta, scale)
    return LatticeSpec(kind, a, theta=theta, scale=scale, placement=Placement(placement), **kw)


def test_square_interstitial_grid():
    arr = build_lattice(LatticeSpec("square", A_SQ))
    assert arr.n_lattice == 100
    xs = np.unique(np.round(arr.lattice_positions[:, 0], 12))
    ys = np.unique(np.round(arr.lattice_positions[:, 1], 12))
    assert len(xs) == len(ys) == 10
    assert arr.impurity_distances().min() == pytest.approx(A_SQ * math.sqrt(2) / 2, rel=1e-12)
    assert np.allclose(arr.lattice_positions[:, 2], 0)


def test_square_substitutional_removes_one_site():
    arr = build_lattice(LatticeSpec("square", A_SQ, placement="substitutional"))
    assert arr.n_lattice == 99
    assert arr.impurity_distances().min() == pytest.approx(A_SQ, rel=1e-12)


def test_oblique_right_angle_is_square():
    sq = build_lattice(LatticeSpec("square", A_SQ))
    ob = build_lattice(LatticeSpec("oblique", A_SQ, theta=math.pi / 2))
    shift = sq.impurity_position - ob.impurity_position
    a = np.array(sorted(map(tuple, np.round(sq.lattice_positions, 10))))
    b = np.array(sorted(map(tuple, np.round(ob.lattice_positions + shift, 10))))
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("kind", list(LatticeKind))
@pytest.mark.parametrize("placement", list(Placement))
def test_atom_counts(kind, placement):
    arr = build_lattice(_spec(kind, placement))
    assert arr.n_lattice == (100 if placement is Placement.INTERSTITIAL else 99)
    d = np.linalg.norm(arr.lattice_positions[:, None] - arr.lattice_positions[None], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-12
    assert arr.impurity_distances().min() > 1e-12


def test_honeycomb_spacing():
    assert rescaled_spacing("honeycomb", a_sq=A_SQ) == pytest.approx(0.15 * math.sqrt(2) / 2, rel=1e-15)


def test_rectangular_unit_scale_is_square():
    assert rescaled_spacing("rectangular", scale=1.0, a_sq=A_SQ) == pytest.approx(A_SQ, rel=1e-15)


def test_oblique_spacing_oracle():
    assert rescaled_spacing("oblique", THETA, a_sq=A_SQ) == pytest.approx(A_OBL_ORACLE, rel=1e-14)


def test_oblique_cos_variant_has_no_real_value_at_reference_angle():
    with pytest.raises(GeometryError):
        rescaled_spacing("oblique", THETA, a_sq=A_SQ, oblique_variant="cos2")


def test_plaquette_distances_oracle():
    assert plaquette_distances_oblique(THETA, A_SQ) == pytest.approx(D_OBL_ORACLE, rel=1e-14)


def test_plaquette_distances_reflection():
    for th in (0.2 * math.pi, 0.35 * math.pi, 0.45 * math.pi):
        a = sorted(plaquette_distances_oblique(th) [2:])
        b = sorted(plaquette_distances_oblique(math.pi - th)[2:])
        assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("kind", ["square", "oblique", "rectangular", "honeycomb"])
def test_interstitial_distance_matches_square_reference(kind):
    arr = build_lattice(_spec(kind))
    assert arr.impurity_distances().min() == pytest.approx(A_SQ * math.sqrt(2) / 2, abs=1e-9)


def test_triangular_closed_form_deviation_is_measured():
    a_rule = rescaled_spacing("triangular", a_sq=A_SQ)
    arr = build_lattice(LatticeSpec("triangular", a_rule))
    d = arr.impurity_distances().min()
    # the centroid of an equilateral triangle is side/sqrt(3) from its corners
    assert d == pytest.approx(a_rule / math.sqrt(3), rel=1e-12)
    assert abs(d - A_SQ / math.sqrt(2)) > 0.01
    eq = build_lattice(LatticeSpec("triangular", equal_distance_spacing("triangular", a_sq=A_SQ)))
    assert eq.impurity_distances().min() == pytest.approx(A_SQ / math.sqrt(2), abs=1e-12)


TABLE_NEIGHBOURS = {
    ("square", "interstitial"): (4, 2), ("triangular", "interstitial"): (3, 1),
    ("oblique", "interstitial"): (2, 1), ("rectangular", "interstitial"): (4, 3),
    ("square", "substitutional"): (4, 2), ("oblique", "substitutional"): (2, 1),
    ("rectangular", "substitutional"): (2, 1), ("honeycomb", "substitutional"): (3, 1),
}


@pytest.mark.parametrize("case", sorted(TABLE_NEIGHBOURS))
def test_neighbor_stats(case):
    stats = nearest_neighbor_stats(build_lattice(_spec(*case)))
    assert (stats.n_nearest, stats.n_distinct_distances) == TABLE_NEIGHBOURS[case]


@pytest.mark.parametrize("kind", ["triangular", "honeycomb"])
def test_hexagonal_shells_have_three_distances(kind):
    placement = "substitutional" if kind == "triangular" else "interstitial"
    stats = nearest_neighbor_stats(build_lattice(_spec(kind, placement)))
    # six neighbours on a regular hexagon: side, short diagonal, long diagonal
    assert stats.n_nearest == 6
    assert stats.n_distinct_distances == 3
    assert stats.distinct_distances[1] / stats.distinct_distances[0] == pytest.approx(math.sqrt(3))
    assert stats.distinct_distances[2] / stats.distinct_distances[0] == pytest.approx(2.0)


def test_merge_distances():
    assert merge_distances([1.0, 1.0 + 1e-9, 2.0], 1e-6) == pytest.approx([1.0, 2.0], rel=1e-8)


def test_patch_shape():
    assert patch_shape(100) == (10, 10)
    assert patch_shape(50) == (5, 10)
    with pytest.raises(GeometryError, match="nearest feasible"):
        patch_shape(97)


def test_spec_validation():
    with pytest.raises(GeometryError):
        LatticeSpec("oblique", 0.1, theta=math.pi)
    with pytest.raises(GeometryError):
        LatticeSpec("square", -1.0)
    with pytest.raises(GeometryError):
        LatticeSpec("square", 0.1, impurity_offset=(1.5, 0.5))
    with pytest.raises(GeometryError):
        build_lattice(LatticeSpec("square", 0.1, n_atoms=97))


def test_coincident_impurity_rejected():
    arr = build_lattice(LatticeSpec("square", A_SQ))
    with pytest.raises(GeometryError):
        arr.with_impurity(arr.lattice_positions[3])


def test_offset_moves_impurity():
    a = build_lattice(LatticeSpec("square", A_SQ, impurity_offset=(0.25, 0.5)))
    b = build_lattice(LatticeSpec("square", A_SQ))
    assert np.allclose(a.impurity_position - b.impurity_position, [-0.25 * A_SQ, 0, 0])


def test_exports_round_trip(tmp_path):
    arr = build_lattice(_spec("oblique"))
    arr.write_json(tmp_path / "l.json")
    data = json.loads((tmp_path / "l.json").read_text())
    assert set(data) >= {"spec", "positions", "impurity"}
    back = EmitterArray.from_json_dict(data)
    assert np.array_equal(back.lattice_positions, arr.lattice_positions)
    assert back.spec == arr.spec
    arr.write_csv(tmp_path / "l.csv")
    rows = (tmp_path / "l.csv").read_text().splitlines()
    assert rows[0] == "x,y,z,is_impurity"
    assert len(rows) == 102
    assert sum(r.endswith(",1") for r in rows[1:]) == 1


def test_spec_dict_round_trip():
    spec = _spec("rectangular", "substitutional")
    assert LatticeSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("theta", [0.15 * math.pi, 0.7 * math.pi, 0.85 * math.pi])
def test_oblique_distance_held_on_both_sides_of_right_angle(theta):
    a = rescaled_spacing("oblique", theta, a_sq=A_SQ)
    arr = build_lattice(LatticeSpec("oblique", a, theta=theta))
    assert arr.impurity_distances().min() == pytest.approx(A_SQ / math.sqrt(2), abs=1e-12)
