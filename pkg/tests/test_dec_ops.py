import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from stokesdirac import signs
from stokesdirac.dec_ops import (
    Cochain,
    Kind,
    LinearMap,
    boundary_dual_derivative,
    dual_boundary_space,
    dual_exterior_derivative,
    dual_hodge_star,
    dual_space,
    duality_pairing,
    exterior_derivative,
    export_operator,
    format_operator,
    hodge_star,
    identity_map,
    load_operator,
    primal_boundary_space,
    primal_space,
    trace_map,
)
from stokesdirac.errors import InvalidArgument, SingularOperator, TypeMismatch
from stokesdirac.mesh import ComplexSkeleton, build_interval_complex

from conftest import all_complexes

COMPLEXES = all_complexes()
IDS = [f"n{c.dimension}_{c.count(c.dimension)}" for c in COMPLEXES]


def test_d0_ramp_and_constants(interval2):
    d0 = exterior_derivative(interval2, 0)
    np.testing.assert_array_equal(d0.toarray(), [[-1, 1, 0], [0, -1, 1]])
    np.testing.assert_array_equal(d0(Cochain(d0.domain, [0, 0.5, 1])).values, [0.5, 0.5])
    c3 = build_interval_complex(1.0, 3)
    np.testing.assert_array_equal(exterior_derivative(c3, 0)(Cochain(primal_space(c3, 0), [4.0] * 4)).values, 0)


@pytest.mark.parametrize("c", COMPLEXES, ids=IDS)
def test_d_squared_is_exactly_zero(c):
    for k in range(c.dimension - 1):
        prod = (exterior_derivative(c, k + 1) @ exterior_derivative(c, k)).matrix
        prod.eliminate_zeros()
        assert prod.nnz == 0
    for j in range(c.dimension - 1):
        prod = (dual_exterior_derivative(c, j + 1) @ dual_exterior_derivative(c, j)).matrix
        prod.eliminate_zeros()
        assert prod.nnz == 0


@pytest.mark.parametrize("c", COMPLEXES, ids=IDS)
def test_derivative_entries_are_unit_integers(c):
    for k in range(c.dimension):
        assert set(np.unique(exterior_derivative(c, k).matrix.data)) <= {-1.0, 1.0}


@pytest.mark.parametrize("c", COMPLEXES, ids=IDS)
def test_dual_and_boundary_derivative_identities(c):
    n = c.dimension
    for p in range(1, n + 1):
        q = n + 1 - p
        raw = c.incidence[n - p + 1].toarray()  # transpose of d^{n-p}, from the mesh directly
        assert np.array_equal(dual_exterior_derivative(c, n - q).toarray(), (-1) ** q * raw)
        sel = np.zeros((c.boundary_count(n - p), c.count(n - p)))
        sel[np.arange(len(sel)), c.boundary_cells[n - p]] = c.boundary_signs[n - p]
        assert np.array_equal(boundary_dual_derivative(c, n - q).toarray(), (-1) ** (n - p) * sel.T)


def test_string_dual_derivatives(interval2):
    di = dual_exterior_derivative(interval2, 0, q=1)
    assert di.toarray().shape == (3, 2)
    np.testing.assert_array_equal(di.toarray(), -exterior_derivative(interval2, 0).toarray().T)
    db = boundary_dual_derivative(interval2, 0)
    np.testing.assert_array_equal(db.toarray(), [[1, 0], [0, 0], [0, 1]])


def test_strip_dual_derivative_sign(strip12):
    np.testing.assert_array_equal(dual_exterior_derivative(strip12, 0).toarray(),
                                  exterior_derivative(strip12, 1).toarray().T)


def test_inconsistent_degrees(interval2):
    with pytest.raises(InvalidArgument):
        dual_exterior_derivative(interval2, 0, q=2)
    with pytest.raises(InvalidArgument):
        exterior_derivative(interval2, 1)


def test_trace_restricts(interval2, strip12):
    tr = trace_map(interval2, 0)
    np.testing.assert_array_equal(tr(Cochain(tr.domain, [7, 3, 9])).values, [7, 9])
    assert trace_map(strip12, 0).codomain.dimension == strip12.boundary_count(0) == 6
    with pytest.raises(InvalidArgument):
        trace_map(interval2, 1)


def test_dual_trace_copies_adjacent_top_cell(interval2, strip12):
    tr = trace_map(interval2, 0, "dual")
    np.testing.assert_array_equal(tr(Cochain(tr.domain, [5.0, 6.0])).values, [5.0, 6.0])
    tr2 = trace_map(strip12, 0, "dual")
    vals = np.arange(4, dtype=float)
    out = tr2(Cochain(tr2.domain, vals)).values
    facets = strip12.boundary_cells[1]
    owners = [int(np.flatnonzero(strip12.incidence[2].toarray()[f])[0]) for f in facets]
    np.testing.assert_array_equal(out, vals[owners])
    with pytest.raises(InvalidArgument):
        trace_map(strip12, 1, "dual")


@pytest.mark.parametrize("cells", [1, 2, 5])
def test_summation_by_parts_with_boundary(cells):
    c = build_interval_complex(1.0, cells)
    rng = np.random.default_rng(cells)
    u = Cochain(primal_space(c, 0), rng.uniform(-1, 1, c.count(0)))
    ph = Cochain(dual_space(c, 0), rng.uniform(-1, 1, c.count(1)))
    pb = Cochain(dual_boundary_space(c, 0), rng.uniform(-1, 1, 2))
    d, di, db, tr = exterior_derivative(c, 0), dual_exterior_derivative(c, 0), boundary_dual_derivative(c, 0), trace_map(c, 0)
    lhs = duality_pairing(ph, d(u)) + duality_pairing(di(ph) + db(pb), u)
    assert abs(lhs - duality_pairing(pb, tr(u))) < 1e-12
    # without boundary values the truncated dual derivative is an exact negative transpose
    assert abs(duality_pairing(ph, d(u)) + duality_pairing(di(ph), u)) < 1e-12


def test_hodge_star_values(interval2):
    np.testing.assert_allclose(hodge_star(interval2, 1).matrix.diagonal(), [2.0, 2.0], rtol=1e-15)
    np.testing.assert_allclose(hodge_star(interval2, 0).matrix.diagonal(), [0.25, 0.5, 0.25], rtol=1e-15)


@pytest.mark.parametrize("c", COMPLEXES, ids=IDS)
def test_hodge_round_trip(c):
    n = c.dimension
    for k in range(n + 1):
        s = hodge_star(c, k)
        assert np.all(s.matrix.diagonal() > 0)
        back = (dual_hodge_star(c, n - k) @ s).toarray()
        np.testing.assert_allclose(back, signs.hodge_round_trip_sign(n, k) * np.eye(c.count(k)), rtol=1e-14)


def test_degenerate_star_raises():
    c = ComplexSkeleton.from_simplices(np.array([0.0, 0.0, 1.0]), [(0, 1), (1, 2)])
    with pytest.raises(SingularOperator):
        hodge_star(c, 1)


def test_pairing_examples(interval2):
    a = Cochain(primal_space(interval2, 1), [1, 2])
    b = Cochain(dual_space(interval2, 0), [3, 4])
    assert duality_pairing(a, b) == 11
    assert duality_pairing(a * 2, b) == 22
    with pytest.raises(TypeMismatch):
        duality_pairing(a, Cochain(primal_space(interval2, 1), [3, 4]))


def test_graded_pairing_sign(strip12):
    # dual-first products pick up (-1)^{deg a * deg b}; only odd*odd differs
    a = Cochain(dual_space(strip12, 1), np.ones(strip12.count(1)))
    b = Cochain(primal_space(strip12, 1), np.ones(strip12.count(1)))
    assert duality_pairing(b, a) == 9
    assert duality_pairing(a, b) == -9


def test_cochain_space_checks(interval2):
    a = Cochain(primal_space(interval2, 0), [1, 2, 3])
    with pytest.raises(TypeMismatch):
        a + Cochain(dual_space(interval2, 1), [1, 2, 3])
    with pytest.raises(InvalidArgument):
        Cochain(primal_space(interval2, 0), [1, 2])
    with pytest.raises(TypeMismatch):
        exterior_derivative(interval2, 0)(Cochain(dual_space(interval2, 1), [1, 2, 3]))


def test_linear_map_shape_check(interval2):
    with pytest.raises(InvalidArgument):
        LinearMap(primal_space(interval2, 0), primal_space(interval2, 1), sp.csr_matrix((3, 3)))


def test_operator_export_round_trip(tmp_path, strip23):
    op = boundary_dual_derivative(strip23, 1)
    export_operator(op, tmp_path / "db.txt", "d_b1")
    back = load_operator(tmp_path / "db.txt")
    assert back.equals(op)
    assert back.domain.kind is Kind.DUAL_BOUNDARY
    text = format_operator(op, "d_b1").splitlines()
    assert text[0].startswith("# {")
    rows = [tuple(map(float, ln.split())) for ln in text[1:]]
    assert rows == sorted(rows)


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, 6, elements=st.floats(-1e6, 1e6)),
       hnp.arrays(np.float64, 6, elements=st.floats(-1e6, 1e6)),
       st.floats(-100, 100))
def test_pairing_bilinear(x, y, s):
    c = build_interval_complex(1.0, 5)
    a = Cochain(primal_space(c, 0), x)
    b = Cochain(dual_space(c, 1), y)
    ref = float(np.dot(x, y))
    assert np.isclose(duality_pairing(a * s, b), s * ref, rtol=1e-9, atol=1e-6)
    assert np.isclose(duality_pairing(b, a), ref, rtol=1e-12, atol=1e-9)


def test_identity_and_boundary_spaces(strip12):
    assert identity_map(primal_boundary_space(strip12, 1)).matrix.shape == (6, 6)
    assert dual_boundary_space(strip12, 1).dimension == strip12.boundary_count(0)
