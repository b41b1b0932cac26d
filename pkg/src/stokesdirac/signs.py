"""Every sign exponent used by the operators, in one place.

All functions return +1 or -1.  Degree bookkeeping: ``n`` is the complex
dimension, ``k`` the degree of the configuration variable, and ``(p, q)``
the flow degrees of a simplicial Dirac structure with ``p + q = n + 1``.

Nothing else in the package writes a ``(-1) ** ...`` expression; operators
that need a sign ask this module for it so the whole table can be tested
exhaustively.
"""

from .errors import InvalidArgument


def parity(exponent: int) -> int:
    """Return ``(-1) ** exponent`` for a non-negative or negative integer."""
    return -1 if exponent % 2 else 1


def check_pq(n: int, p: int, q: int) -> None:
    if n < 1:
        raise InvalidArgument(f"complex dimension must be >= 1, got {n}")
    if p + q != n + 1 or p < 1 or q < 1:
        raise InvalidArgument(f"degrees (p={p}, q={q}) need p + q = n + 1 = {n + 1}, p, q >= 1")


def check_nk(n: int, k: int) -> None:
    if n < 1:
        raise InvalidArgument(f"complex dimension must be >= 1, got {n}")
    if not 0 <= k <= n - 1:
        raise InvalidArgument(f"configuration degree k={k} outside [0, {n - 1}]")


def r_exponent(p: int, q: int) -> int:
    return p * q + 1


def wedge_sign(left_degree: int, right_degree: int) -> int:
    """Sign picked up when a dual cochain is wedged in front of a primal one.

    The primal-dual wedge is the plain dot product with the primal factor on
    the left; swapping the factors costs the usual graded sign.
    """
    return parity(left_degree * right_degree)


def dual_derivative_sign(q: int) -> int:
    """Sign in ``d_i^{n-q} = (-1)^q (d^{n-p})^T``."""
    return parity(q)


def boundary_derivative_sign(n: int, p: int) -> int:
    """Sign in ``d_b^{n-q} = (-1)^{n-p} (tr^{n-p})^T``."""
    return parity(n - p)


def dirac_interior_sign(p: int, q: int) -> int:
    """``(-1)^r`` multiplying the dual blocks of the simplicial Dirac structure."""
    return parity(r_exponent(p, q))


def dirac_trace_sign(p: int) -> int:
    """``(-1)^p`` in the boundary flow ``f_b = (-1)^p tr e_p``."""
    return parity(p)


def hodge_round_trip_sign(n: int, k: int) -> int:
    """Sign of the dual star composed with the primal star on k-cochains."""
    return parity(k * (n - k))


def canonical_sign(n: int, k: int) -> int:
    """``(-1)^{k(n-k)}`` in the canonical momentum row."""
    return parity(k * (n - k))


def cotangent_sign(n: int, k: int) -> int:
    """``(-1)^{n-k}`` on the dual derivative in the cotangent map."""
    return parity(n - k)


def reduced_dual_sign(n: int, k: int) -> int:
    """``(-1)^{n(k+1)}`` multiplying the dual derivative in the reduced map.

    Equals ``canonical_sign * cotangent_sign`` up to the even factor k(k+1).
    """
    return parity(n * (k + 1))


def reduced_boundary_sign(n: int, k: int) -> int:
    """Sign on the boundary-effort term of the reduced momentum row."""
    return canonical_sign(n, k)


def port_flow_sign() -> int:
    """The boundary port flow is the negated boundary-state rate."""
    return -1


def conversion_signs(n: int, k: int) -> dict[str, int]:
    """Variable substitution taking the reduced map onto a simplicial Dirac structure.

    The target structure has ``(p, q) = (n - k, k + 1)`` because the reduced
    configuration rate is a primal (k+1)-cochain.  Keys name the converted
    variable; values are the factors multiplying the reduced variable it is
    built from::

        e_p = ebar_pi       e_q = ebar_rho      e_b = s * ebar_b
        f_p = pibar_dot     f_q = rhobar_dot    f_b = t * rhobar_b_dot
    """
    check_nk(n, k)
    p, q = n - k, k + 1
    r = r_exponent(p, q)
    return {
        "e_p": 1,
        "e_q": 1,
        "e_b": -canonical_sign(n, k) * parity(r),
        "f_p": 1,
        "f_q": 1,
        "f_b": -parity(n - k),
    }


def literal_conversion_signs(n: int, k: int) -> dict[str, int]:
    """The substitution as written for the continuum, kept for comparison.

    ``e_p = ebar_rho, e_q = (-1)^r ebar_pi, f_p = rhobar_dot,
    f_q = (-1)^{n(k+1)+1} pibar_dot, f_b = -(-1)^r rhobar_b_dot`` with
    ``p = k + 1, q = n - k``.
    """
    check_nk(n, k)
    r = r_exponent(k + 1, n - k)
    return {
        "e_p": 1,
        "e_q": parity(r),
        "f_p": 1,
        "f_q": parity(n * (k + 1) + 1),
        "f_b": -parity(r),
    }
