import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdirac.errors import InvalidArgument
from stokesdirac.mesh import (
    ComplexSkeleton,
    build_interval_complex,
    build_triangle_strip_complex,
    validate_complex,
)

from conftest import all_complexes


def test_interval_worked_example(interval2):
    c = interval2
    assert c.count(0) == 3 and c.count(1) == 2
    np.testing.assert_array_equal(c.incidence[1].toarray(), [[-1, 0], [1, -1], [0, 1]])
    np.testing.assert_allclose(c.dual_measures[0], [0.25, 0.5, 0.25], rtol=0, atol=1e-15)
    np.testing.assert_array_equal(c.dual_measures[1], [1.0, 1.0])
    np.testing.assert_allclose(c.primal_measures[1], [0.5, 0.5])
    np.testing.assert_array_equal(c.boundary_cells[0], [0, 2])
    np.testing.assert_array_equal(c.dual_boundary_measures[0], [1.0, 1.0])


def test_interval_single_cell(interval1):
    assert interval1.count(0) == 2 and interval1.count(1) == 1
    np.testing.assert_allclose(interval1.dual_measures[0], [0.5, 0.5])


def test_strip_counts_and_orientation_signs(strip12):
    c = strip12
    assert [c.count(k) for k in range(3)] == [6, 9, 4]
    assert c.euler_characteristic() == 1
    assert c.boundary_count(0) == 6 and c.boundary_count(1) == 6
    np.testing.assert_array_equal(c.boundary_signs[1], [1, -1, 1, 1, -1, -1])
    # every triangle is counterclockwise once its orientation is applied
    for t, o in zip(c.simplices[2], c.orientations):
        p = c.vertices[t]
        assert o * np.linalg.det(np.array([p[1] - p[0], p[2] - p[0]])) > 0


def test_boundary_edges_chain_into_a_cycle(strip23):
    # signed boundary edges must form a closed loop: their boundary vanishes
    c = strip23
    idx = c.boundary_cells[1]
    chain = np.zeros(c.count(1))
    chain[idx] = c.boundary_signs[1]
    np.testing.assert_array_equal(c.incidence[1] @ chain, 0)
    # and equal the boundary of the sum of all (positively oriented) triangles
    np.testing.assert_array_equal(c.incidence[2] @ np.ones(c.count(2)), chain)


def _vertex_area_oracle(c):
    """Equilateral triangles: each vertex owns one third of every incident triangle."""
    out = np.zeros(c.count(0))
    for t in c.simplices[2]:
        p = c.vertices[t]
        area = 0.5 * abs(np.linalg.det(np.array([p[1] - p[0], p[2] - p[0]])))
        out[t] += area / 3
    return out


@pytest.mark.parametrize("rows,cols,h", [(1, 2, 1.0), (2, 3, 0.5), (3, 1, 2.0)])
def test_strip_dual_measures_against_geometry(rows, cols, h):
    c = build_triangle_strip_complex(rows, cols, h)
    np.testing.assert_allclose(c.dual_measures[0], _vertex_area_oracle(c), rtol=1e-13)
    inradius = h / (2 * math.sqrt(3))
    interior = ~c.boundary_flags[1]
    np.testing.assert_allclose(c.dual_measures[1][interior], 2 * inradius, rtol=1e-13)
    np.testing.assert_allclose(c.dual_measures[1][~interior], inradius, rtol=1e-13)
    np.testing.assert_array_equal(c.dual_measures[2], 1.0)
    np.testing.assert_allclose(c.primal_measures[2], math.sqrt(3) / 4 * h * h, rtol=1e-13)


def test_strip_dual_boundary_measures(strip12):
    c = strip12
    # dual boundary points over boundary edges
    np.testing.assert_array_equal(c.dual_boundary_measures[0], 1.0)
    # dual boundary segments around boundary vertices: half of each adjacent boundary edge
    np.testing.assert_allclose(c.dual_boundary_measures[1], 1.0)
    assert math.isclose(float(np.sum(c.dual_boundary_measures[1])), 6.0)


@pytest.mark.parametrize("c", all_complexes(), ids=lambda c: f"n{c.dimension}_{c.count(c.dimension)}")
def test_validation_passes(c):
    rep = validate_complex(c)
    assert rep.passed, rep.to_dict()
    names = {ch.name for ch in rep.checks}
    assert {"boundary_of_boundary", "well_centered", "dual_measure_sum", "euler_characteristic"} <= names


def test_obtuse_triangle_fails_well_centeredness():
    verts = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]])
    c = ComplexSkeleton.from_simplices(verts, [(0, 1, 2)])
    rep = validate_complex(c)
    assert not rep["well_centered"].passed
    assert rep["well_centered"].offending == [0]


def test_reversed_orientation_is_reported():
    c = build_triangle_strip_complex(1, 1)
    bad = ComplexSkeleton.from_simplices(c.vertices, c.simplices[2], orientations=c.orientations * [1, -1])
    assert not validate_complex(bad)["orientation_consistency"].passed


def test_json_round_trip(tmp_path, strip23):
    p = tmp_path / "m.json"
    strip23.save(p)
    back = ComplexSkeleton.load(p)
    for k in range(3):
        np.testing.assert_array_equal(back.simplices[k], strip23.simplices[k])
        np.testing.assert_array_equal(back.incidence[k + 1 if k < 2 else 2].toarray(),
                                      strip23.incidence[k + 1 if k < 2 else 2].toarray())
        np.testing.assert_array_equal(back.dual_measures[k], strip23.dual_measures[k])
    doc = json.loads(p.read_text())
    assert doc["format"] == "stokesdirac-mesh"


@pytest.mark.parametrize("args", [(1.0, 0), (0.0, 3), (-1.0, 2), (1.0, 2.5)])
def test_interval_rejects_bad_arguments(args):
    with pytest.raises(InvalidArgument):
        build_interval_complex(*args)


def test_strip_rejects_bad_arguments():
    with pytest.raises(InvalidArgument):
        build_triangle_strip_complex(0, 2)
    with pytest.raises(InvalidArgument):
        build_triangle_strip_complex(1, 2, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.floats(0.1, 20.0))
def test_interval_dual_cells_tile(cells, length):
    c = build_interval_complex(length, cells)
    assert math.isclose(float(np.sum(c.dual_measures[0])), length, rel_tol=1e-12)
    assert validate_complex(c).passed


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4))
def test_strip_boundary_of_boundary(rows, cols):
    c = build_triangle_strip_complex(rows, cols)
    assert (c.incidence[1] @ c.incidence[2]).count_nonzero() == 0
    assert c.euler_characteristic() == 1
    assert math.isclose(float(np.sum(c.dual_measures[0])), c.total_measure, rel_tol=1e-12)
