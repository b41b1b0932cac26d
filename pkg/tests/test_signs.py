import itertools

import pytest

from stokesdirac import signs
from stokesdirac.errors import InvalidArgument

NK = [(n, k) for n in (1, 2, 3) for k in range(n)]
NPQ = [(n, p, n + 1 - p) for n in (1, 2, 3) for p in range(1, n + 1)]


def test_parity_values():
    assert [signs.parity(e) for e in range(-3, 4)] == [-1, 1, -1, 1, -1, 1, -1]


@pytest.mark.parametrize("n,p,q", NPQ)
def test_dirac_signs_match_exponents(n, p, q):
    assert signs.dirac_interior_sign(p, q) == (-1) ** (p * q + 1)
    assert signs.dirac_trace_sign(p) == (-1) ** p
    assert signs.dual_derivative_sign(q) == (-1) ** q
    assert signs.boundary_derivative_sign(n, p) == (-1) ** (n - p)


def test_string_dirac_signs():
    # n = 1, p = q = 1: r = 2
    assert signs.dirac_interior_sign(1, 1) == 1
    assert signs.dirac_trace_sign(1) == -1


@pytest.mark.parametrize("n,k", NK)
def test_reduced_dual_sign_factors(n, k):
    assert signs.reduced_dual_sign(n, k) == signs.canonical_sign(n, k) * signs.cotangent_sign(n, k)


@pytest.mark.parametrize("n,k", NK)
def test_conversion_signs_are_units(n, k):
    s = signs.conversion_signs(n, k)
    assert set(s) == {"e_p", "e_q", "e_b", "f_p", "f_q", "f_b"}
    assert set(s.values()) <= {1, -1}
    # the boundary pair flips exactly like the port-flow pairing multiplier
    assert s["e_b"] * s["f_b"] == signs.port_flow_sign()


@pytest.mark.parametrize("n,k", NK)
def test_literal_conversion_signs(n, k):
    s = signs.literal_conversion_signs(n, k)
    r = (k + 1) * (n - k) + 1
    assert s["e_q"] == (-1) ** r
    assert s["f_b"] == -((-1) ** r)
    assert s["f_q"] == (-1) ** (n * (k + 1) + 1)


def test_degree_checks():
    with pytest.raises(InvalidArgument):
        signs.check_pq(1, 1, 2)
    with pytest.raises(InvalidArgument):
        signs.check_pq(0, 1, 0)
    with pytest.raises(InvalidArgument):
        signs.check_nk(2, 2)
    with pytest.raises(InvalidArgument):
        signs.conversion_signs(1, 1)


@pytest.mark.parametrize("a,b", list(itertools.product(range(4), repeat=2)))
def test_wedge_sign_symmetric(a, b):
    assert signs.wedge_sign(a, b) == signs.wedge_sign(b, a) == (-1) ** (a * b)
