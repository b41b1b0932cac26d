"""Gauge quotient of the canonical phase space and the reduced Poisson map.

The gauge group adds exact k-cochains to the configuration.  Quotienting
replaces the configuration ``rho`` by ``d rho``; the reduced Poisson map is
obtained by sandwiching the canonical map between the cotangent and tangent
maps of the quotient, and it agrees with a simplicial Dirac structure after
a relabelling of variables with signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import signs
from .dec_ops import (
    Cochain,
    CochainSpace,
    Kind,
    LinearMap,
    boundary_dual_derivative,
    dual_boundary_space,
    dual_exterior_derivative,
    dual_space,
    exterior_derivative,
    identity_map,
    primal_boundary_space,
    primal_space,
    trace_map,
)
from .dirac import (
    Block,
    StructureMaps,
    canonical_sharp_map,
    check_maximal_isotropy,
    max_block_difference,
    simplicial_dirac,
)
from .errors import ConsistencyError, InvalidArgument, TypeMismatch
from .mesh import ComplexSkeleton

COMMUTATION_TOL = 1e-14
IMAGE_TOL = 1e-10


@dataclass(frozen=True)
class GaugeAction:
    """Shifts of the configuration by the image of ``generator``.

    For k >= 1 the generator is d^{k-1}.  For k = 0 there is no lower
    derivative; the generator embeds one real parameter as a constant
    0-cochain, which spans the kernel of d^0 on a connected complex.
    """

    complex: ComplexSkeleton
    k: int
    generator: LinearMap

    def act(self, rho: Cochain, alpha: Cochain) -> Cochain:
        if rho.space != self.generator.codomain:
            raise TypeMismatch(f"gauge acts on {self.generator.codomain}, got {rho.space}")
        return rho + self.generator(alpha)

    @property
    def parameter_space(self) -> CochainSpace:
        return self.generator.domain


def gauge_action(c: ComplexSkeleton, k: int) -> GaugeAction:
    signs.check_nk(c.dimension, k)
    if k >= 1:
        gen = exterior_derivative(c, k - 1)
    else:
        params = CochainSpace(-1, Kind.PRIMAL, 1, c.dimension)
        gen = LinearMap(params, primal_space(c, 0), sp.csr_matrix(np.ones((c.count(0), 1))))
    return GaugeAction(c, k, gen)


@dataclass(frozen=True, eq=False)
class ReducedState:
    rho_bar: Cochain
    pi: Cochain
    rho_b: Cochain

    def image_residual(self, c: ComplexSkeleton, k: int) -> float:
        """Distance of ``rho_bar`` from the image of d^k, by least squares."""
        d = exterior_derivative(c, k).toarray()
        x, *_ = np.linalg.lstsq(d, self.rho_bar.values, rcond=None)
        return float(np.max(np.abs(d @ x - self.rho_bar.values), initial=0.0))

    def check(self, c: ComplexSkeleton, k: int, tol: float = IMAGE_TOL) -> None:
        res = self.image_residual(c, k)
        if res >= tol:
            raise InvalidArgument(f"reduced configuration is not exact (residual {res:.3g})")


def _canonical_state_spaces(c: ComplexSkeleton, k: int):
    n = c.dimension
    return primal_space(c, k), dual_space(c, n - k), primal_boundary_space(c, k)


def quotient_map(c: ComplexSkeleton, k: int, rho: Cochain, pi: Cochain, rho_b: Cochain) -> ReducedState:
    signs.check_nk(c.dimension, k)
    for name, x, want in zip(("rho", "pi", "rho_b"), (rho, pi, rho_b), _canonical_state_spaces(c, k)):
        if x.space != want:
            raise InvalidArgument(f"{name} must be a {want} cochain, got {x.space}")
    return ReducedState(exterior_derivative(c, k)(rho), pi, rho_b)


def _reduced_effort_spaces(c: ComplexSkeleton, k: int):
    n = c.dimension
    return (
        ("ebar_rho", dual_space(c, n - k - 1)),
        ("ebar_pi", primal_space(c, k)),
        ("ebar_b", dual_boundary_space(c, n - k - 1)),
    )


def _reduced_rate_spaces(c: ComplexSkeleton, k: int):
    n = c.dimension
    return (
        ("rhobar_dot", primal_space(c, k + 1)),
        ("pibar_dot", dual_space(c, n - k)),
        ("rhobar_b_dot", primal_boundary_space(c, k)),
    )


def tangent_map(c: ComplexSkeleton, k: int) -> StructureMaps:
    """Canonical rates to reduced rates: diag(d^k, I, I)."""
    signs.check_nk(c.dimension, k)
    rho, pi, rho_b = _canonical_state_spaces(c, k)
    return StructureMaps(
        name=f"tangent(n={c.dimension},k={k})",
        rows=_reduced_rate_spaces(c, k),
        cols=(("rho_dot", rho), ("pi_dot", pi), ("rho_b_dot", rho_b)),
        blocks={
            ("rhobar_dot", "rho_dot"): Block(exterior_derivative(c, k), 1, f"d^{k}"),
            ("pibar_dot", "pi_dot"): Block(identity_map(pi), 1, "I"),
            ("rhobar_b_dot", "rho_b_dot"): Block(identity_map(rho_b), 1, "I"),
        },
    )


def cotangent_map(c: ComplexSkeleton, k: int) -> StructureMaps:
    """Reduced efforts to canonical efforts: diag((-1)^{n-k} d_i^{n-k-1}, I, I)."""
    n = c.dimension
    signs.check_nk(n, k)
    e_rho, e_pi, e_b = dual_space(c, n - k), primal_space(c, k), dual_boundary_space(c, n - k - 1)
    return StructureMaps(
        name=f"cotangent(n={n},k={k})",
        rows=(("e_rho", e_rho), ("e_pi", e_pi), ("e_b", e_b)),
        cols=_reduced_effort_spaces(c, k),
        blocks={
            ("e_rho", "ebar_rho"): Block(
                dual_exterior_derivative(c, n - k - 1), signs.cotangent_sign(n, k), f"d_i^{n - k - 1}"
            ),
            ("e_pi", "ebar_pi"): Block(identity_map(e_pi), 1, "I"),
            ("e_b", "ebar_b"): Block(identity_map(e_b), 1, "I"),
        },
    )


_REDUCED_PAIRING = {
    "rhobar_dot": ("ebar_rho", 1),
    "pibar_dot": ("ebar_pi", 1),
    "rhobar_b_dot": ("ebar_b", signs.port_flow_sign()),
}


def closed_form_reduced_sharp(c: ComplexSkeleton, k: int) -> StructureMaps:
    """The reduced Poisson map assembled directly from the operators.

    ``(d^k e_pi, -(-1)^{n(k+1)} d_i e_rho - (-1)^{k(n-k)} d_b e_b, -tr^k e_pi)``
    """
    n = c.dimension
    signs.check_nk(n, k)
    return StructureMaps(
        name=f"reduced_sharp(n={n},k={k})",
        rows=_reduced_rate_spaces(c, k),
        cols=_reduced_effort_spaces(c, k),
        blocks={
            ("rhobar_dot", "ebar_pi"): Block(exterior_derivative(c, k), 1, f"d^{k}"),
            ("pibar_dot", "ebar_rho"): Block(
                dual_exterior_derivative(c, n - k - 1), -signs.reduced_dual_sign(n, k), f"d_i^{n - k - 1}"
            ),
            ("pibar_dot", "ebar_b"): Block(
                boundary_dual_derivative(c, n - k - 1), -signs.reduced_boundary_sign(n, k), f"d_b^{n - k - 1}"
            ),
            ("rhobar_b_dot", "ebar_pi"): Block(trace_map(c, k), -1, f"tr^{k}"),
        },
        pairing=dict(_REDUCED_PAIRING),
    )


def literal_closed_form_reduced_sharp(c: ComplexSkeleton, k: int) -> StructureMaps:
    """Variant with a common sign ``-(-1)^{n(k+1)}`` on both momentum terms.

    Agrees with :func:`closed_form_reduced_sharp` only when n + k is even;
    kept so reports can show the difference.
    """
    n = c.dimension
    s = closed_form_reduced_sharp(c, k)
    blocks = dict(s.blocks)
    blocks["pibar_dot", "ebar_rho"] = Block(
        dual_exterior_derivative(c, n - k - 1),
        -signs.reduced_dual_sign(n, k) * signs.cotangent_sign(n, k),
        f"d_i^{n - k - 1}",
    )
    blocks["pibar_dot", "ebar_b"] = Block(
        boundary_dual_derivative(c, n - k - 1), -signs.reduced_dual_sign(n, k), f"d_b^{n - k - 1}"
    )
    return StructureMaps(s.name + "[literal]", s.rows, s.cols, blocks, dict(s.pairing))


def commutation_residual(composed: StructureMaps, closed: StructureMaps) -> float:
    return max_block_difference(composed, closed)


def reduced_sharp(c: ComplexSkeleton, k: int, *, sharp: StructureMaps | None = None,
                  check: bool = True, tol: float = COMMUTATION_TOL) -> StructureMaps:
    """Compose tangent, canonical and cotangent maps.

    With ``check`` the result is compared with the closed form and a
    :class:`ConsistencyError` names the first offending block.
    """
    if sharp is None:
        sharp = canonical_sharp_map(c, k)
    composed = tangent_map(c, k).compose(sharp.compose(cotangent_map(c, k)))
    composed = StructureMaps(
        f"reduced_sharp(n={c.dimension},k={k})", composed.rows, composed.cols, composed.blocks,
        dict(_REDUCED_PAIRING),
    )
    if check:
        closed = closed_form_reduced_sharp(c, k)
        for r in closed.row_names:
            for col in closed.col_names:
                diff = abs(composed.block(r, col).matrix - closed.block(r, col).matrix)
                if diff.nnz and diff.max() >= tol:
                    raise ConsistencyError(
                        f"reduced map block ({r}, {col}) differs from the closed form by {diff.max():.3g}",
                        block=f"{r},{col}",
                    )
    return composed


# relabelling onto a simplicial Dirac structure

_FLOW_LABELS = {"pibar_dot": "f_p", "rhobar_dot": "f_q", "rhobar_b_dot": "f_b"}
_EFFORT_LABELS = {"ebar_pi": "e_p", "ebar_rho": "e_q", "ebar_b": "e_b"}


@dataclass(frozen=True)
class BoundaryConstraint:
    """Declared relation ``e_b = sign * tr(ebar_rho)``, not part of the structure.

    ``trace`` is None when ``ebar_rho`` is not a dual 0-cochain, since the
    dual trace exists only in that degree.
    """

    sign: int
    trace: LinearMap | None
    description: str

    def residual(self, e_b: Cochain, ebar_rho: Cochain) -> float:
        if self.trace is None:
            raise InvalidArgument("no dual trace in this degree")
        return float(np.max(np.abs(e_b.values - self.sign * self.trace(ebar_rho).values), initial=0.0))


@dataclass(frozen=True, eq=False)
class ConvertedStructure:
    structure: StructureMaps
    constraint: BoundaryConstraint
    signs: dict


def _relabel(m: StructureMaps, flows: dict, efforts: dict, factors: dict, name: str,
             pairing: dict | None = None) -> StructureMaps:
    blocks = {}
    for (r, col), b in m.blocks.items():
        blocks[flows[r], efforts[col]] = Block(b.op, b.sign * factors[flows[r]] * factors[efforts[col]], b.source)
    rows = tuple((flows[r], s) for r, s in m.rows)
    cols = tuple((efforts[col], s) for col, s in m.cols)
    return StructureMaps(name, rows, cols, blocks, pairing or {})


def conversion_mismatches(converted: StructureMaps, target: StructureMaps) -> list:
    """Names of blocks whose matrices are not bit-identical to the target's."""
    bad = []
    if dict(converted.rows) != dict(target.rows) or dict(converted.cols) != dict(target.cols):
        return ["spaces"]
    for r in target.row_names:
        for col in target.col_names:
            a, b = converted.block(r, col).matrix, target.block(r, col).matrix
            if (a != b).nnz:
                bad.append(f"{r},{col}")
    return bad


def sign_convert_to_stokes_dirac(reduced: StructureMaps, c: ComplexSkeleton, k: int, *,
                                 check: bool = True) -> ConvertedStructure:
    """Relabel the reduced map as the simplicial Dirac structure with (p, q) = (n-k, k+1)."""
    n = c.dimension
    factors = signs.conversion_signs(n, k)
    target = simplicial_dirac(c, n - k, k + 1)
    order = {name: i for i, name in enumerate(target.row_names)}
    conv = _relabel(reduced, _FLOW_LABELS, _EFFORT_LABELS, factors,
                    f"converted({reduced.name})", dict(target.pairing))
    rows = tuple(sorted(conv.rows, key=lambda rs: order[rs[0]]))
    cols_order = {name: i for i, name in enumerate(target.col_names)}
    cols = tuple(sorted(conv.cols, key=lambda cs: cols_order[cs[0]]))
    conv = StructureMaps(conv.name, rows, cols, conv.blocks, conv.pairing)
    if check:
        bad = conversion_mismatches(conv, target)
        if bad:
            raise ConsistencyError(f"converted block ({bad[0]}) does not match the simplicial Dirac structure",
                                   block=bad[0])
    sign = signs.cotangent_sign(n, k)
    trace = trace_map(c, 0, "dual") if n - k - 1 == 0 else None
    constraint = BoundaryConstraint(sign, trace, f"e_b = {sign:+d} * tr(ebar_rho)")
    return ConvertedStructure(conv, constraint, factors)


def unconvert(converted: StructureMaps, n: int, k: int) -> StructureMaps:
    """Inverse relabelling; the sign factors are their own inverses."""
    factors = signs.conversion_signs(n, k)
    flows = {v: key for key, v in _FLOW_LABELS.items()}
    efforts = {v: key for key, v in _EFFORT_LABELS.items()}
    inv_factors = {**{key: factors[v] for key, v in _FLOW_LABELS.items()},
                   **{key: factors[v] for key, v in _EFFORT_LABELS.items()}}
    m = _relabel(converted, flows, efforts, inv_factors, f"unconverted({converted.name})",
                 dict(_REDUCED_PAIRING))
    rows_order = {name: i for i, (name, _) in enumerate(_REDUCED_ROWS)}
    cols_order = {name: i for i, (name, _) in enumerate(_REDUCED_COLS)}
    rows = tuple(sorted(m.rows, key=lambda rs: rows_order[rs[0]]))
    cols = tuple(sorted(m.cols, key=lambda cs: cols_order[cs[0]]))
    return StructureMaps(m.name, rows, cols, m.blocks, m.pairing)


_REDUCED_ROWS = (("rhobar_dot", None), ("pibar_dot", None), ("rhobar_b_dot", None))
_REDUCED_COLS = (("ebar_rho", None), ("ebar_pi", None), ("ebar_b", None))


# report


@dataclass
class ReductionReport:
    n: int
    k: int
    commutation_residual: float
    isotropy_pass: bool
    sign_conversion_pass: bool
    dim_reduced: int
    literal_closed_form_residual: float = 0.0
    conversion_mismatches: tuple = ()

    @property
    def passed(self) -> bool:
        return self.commutation_residual < COMMUTATION_TOL and self.isotropy_pass and self.sign_conversion_pass

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "commutation_residual": self.commutation_residual,
            "isotropy_pass": self.isotropy_pass,
            "sign_conversion_pass": self.sign_conversion_pass,
            "dim_reduced": self.dim_reduced,
            "literal_closed_form_residual": self.literal_closed_form_residual,
            "conversion_mismatches": list(self.conversion_mismatches),
        }


def reduction_report(c: ComplexSkeleton, k: int, *, samples: int = 1000, tol: float = 1e-12,
                     rng=0, sharp: StructureMaps | None = None) -> ReductionReport:
    """Run commutation, isotropy and conversion checks without raising."""
    composed = reduced_sharp(c, k, sharp=sharp, check=False)
    closed = closed_form_reduced_sharp(c, k)
    residual = commutation_residual(composed, closed)
    iso = check_maximal_isotropy(composed, samples, tol, rng)
    conv = sign_convert_to_stokes_dirac(composed, c, k, check=False)
    bad = conversion_mismatches(conv.structure, simplicial_dirac(c, c.dimension - k, k + 1))
    return ReductionReport(
        n=c.dimension,
        k=k,
        commutation_residual=residual,
        isotropy_pass=iso.passed,
        sign_conversion_pass=not bad,
        dim_reduced=iso.dim_D,
        literal_closed_form_residual=max_block_difference(literal_closed_form_reduced_sharp(c, k), closed),
        conversion_mismatches=tuple(bad),
    )
