"""Cochain spaces and the discrete operators acting between them.

Cochains store integrated quantities, so the primal-dual wedge of
complementary cochains is a dot product of value vectors.  The only extra
ingredient is the graded sign when the dual factor is written first (see
:func:`duality_pairing`).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import signs
from .errors import InvalidArgument, SingularOperator, TypeMismatch
from .mesh import ComplexSkeleton


class Kind(str, enum.Enum):
    PRIMAL = "primal"
    DUAL = "interior-dual"
    PRIMAL_BOUNDARY = "primal-boundary"
    DUAL_BOUNDARY = "dual-boundary"

    @property
    def is_dual(self) -> bool:
        return self in (Kind.DUAL, Kind.DUAL_BOUNDARY)

    @property
    def is_boundary(self) -> bool:
        return self in (Kind.PRIMAL_BOUNDARY, Kind.DUAL_BOUNDARY)


@dataclass(frozen=True)
class CochainSpace:
    """Degree-k cochains of one kind over an n-dimensional complex."""

    degree: int
    kind: Kind
    dimension: int
    n: int

    def __str__(self) -> str:
        return f"{self.kind.value}^{self.degree}[{self.dimension}]"

    def zeros(self) -> "Cochain":
        return Cochain(self, np.zeros(self.dimension))

    def to_dict(self) -> dict:
        return {"degree": self.degree, "kind": self.kind.value, "dimension": self.dimension, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "CochainSpace":
        return cls(int(d["degree"]), Kind(d["kind"]), int(d["dimension"]), int(d["n"]))


def primal_space(c: ComplexSkeleton, k: int) -> CochainSpace:
    if not 0 <= k <= c.dimension:
        raise InvalidArgument(f"primal degree {k} outside [0, {c.dimension}]")
    return CochainSpace(k, Kind.PRIMAL, c.count(k), c.dimension)


def dual_space(c: ComplexSkeleton, j: int) -> CochainSpace:
    """Interior-dual j-cochains, one per primal (n-j)-simplex."""
    if not 0 <= j <= c.dimension:
        raise InvalidArgument(f"dual degree {j} outside [0, {c.dimension}]")
    return CochainSpace(j, Kind.DUAL, c.count(c.dimension - j), c.dimension)


def primal_boundary_space(c: ComplexSkeleton, k: int) -> CochainSpace:
    if not 0 <= k <= c.dimension - 1:
        raise InvalidArgument(f"boundary degree {k} outside [0, {c.dimension - 1}]")
    return CochainSpace(k, Kind.PRIMAL_BOUNDARY, c.boundary_count(k), c.dimension)


def dual_boundary_space(c: ComplexSkeleton, j: int) -> CochainSpace:
    """Dual boundary j-cells, one per boundary primal (n-1-j)-simplex."""
    if not 0 <= j <= c.dimension - 1:
        raise InvalidArgument(f"dual boundary degree {j} outside [0, {c.dimension - 1}]")
    return CochainSpace(j, Kind.DUAL_BOUNDARY, c.boundary_count(c.dimension - 1 - j), c.dimension)


@dataclass(frozen=True, eq=False)
class Cochain:
    space: CochainSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.space.dimension,):
            raise InvalidArgument(f"{self.space} needs {self.space.dimension} values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def _same(self, other: "Cochain") -> None:
        if not isinstance(other, Cochain) or other.space != self.space:
            raise TypeMismatch(f"cannot combine {self.space} with {getattr(other, 'space', other)}")

    def __add__(self, other):
        self._same(other)
        return Cochain(self.space, self.values + other.values)

    def __sub__(self, other):
        self._same(other)
        return Cochain(self.space, self.values - other.values)

    def __mul__(self, scalar):
        return Cochain(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Cochain(self.space, -self.values)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A sparse matrix with typed domain and codomain."""

    domain: CochainSpace
    codomain: CochainSpace
    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=float)
        if m.shape != (self.codomain.dimension, self.domain.dimension):
            raise InvalidArgument(
                f"matrix shape {m.shape} does not match {self.codomain} <- {self.domain}"
            )
        m.sort_indices()
        object.__setattr__(self, "matrix", m)

    def __call__(self, x: Cochain) -> Cochain:
        if not isinstance(x, Cochain) or x.space != self.domain:
            raise TypeMismatch(f"map expects {self.domain}, got {getattr(x, 'space', x)}")
        return Cochain(self.codomain, self.matrix @ x.values)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain != self.domain:
            raise TypeMismatch(f"cannot compose {self.domain} <- ... with ... -> {other.codomain}")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def __mul__(self, scalar) -> "LinearMap":
        return LinearMap(self.domain, self.codomain, self.matrix * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "LinearMap":
        return self * -1

    def __add__(self, other: "LinearMap") -> "LinearMap":
        if (other.domain, other.codomain) != (self.domain, self.codomain):
            raise TypeMismatch("cannot add maps between different spaces")
        return LinearMap(self.domain, self.codomain, self.matrix + other.matrix)

    def transpose(self, domain: CochainSpace, codomain: CochainSpace) -> "LinearMap":
        """Transpose matrix re-typed onto the given spaces."""
        return LinearMap(domain, codomain, self.matrix.T)

    def equals(self, other: "LinearMap") -> bool:
        """Bit-exact equality of descriptors and matrix entries."""
        if (other.domain, other.codomain) != (self.domain, self.codomain):
            return False
        return (self.matrix != other.matrix).nnz == 0

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def identity_map(space: CochainSpace) -> LinearMap:
    return LinearMap(space, space, sp.identity(space.dimension, format="csr"))


def zero_map(domain: CochainSpace, codomain: CochainSpace) -> LinearMap:
    return LinearMap(domain, codomain, sp.csr_matrix((codomain.dimension, domain.dimension)))


def exterior_derivative(c: ComplexSkeleton, k: int) -> LinearMap:
    """Coboundary d^k from primal k-cochains to primal (k+1)-cochains."""
    if not 0 <= k < c.dimension:
        raise InvalidArgument(f"d^{k} undefined on a {c.dimension}-complex")
    return LinearMap(primal_space(c, k), primal_space(c, k + 1), c.boundary_operator(k + 1).T)


def dual_exterior_derivative(c: ComplexSkeleton, degree: int, q: int | None = None) -> LinearMap:
    """Interior dual derivative d_i^{n-q} = (-1)^q (d^{n-p})^T.

    ``degree`` is n - q.  Passing ``q`` as well checks it against ``degree``.
    """
    n = c.dimension
    if q is None:
        q = n - degree
    if degree != n - q:
        raise InvalidArgument(f"inconsistent degrees: n - q = {n - q} but degree = {degree}")
    p = n + 1 - q
    signs.check_pq(n, p, q)
    d = exterior_derivative(c, n - p)
    return d.transpose(dual_space(c, degree), dual_space(c, degree + 1)) * signs.dual_derivative_sign(q)


_TRACE_KINDS = {"primal": Kind.PRIMAL, "dual": Kind.DUAL, "interior-dual": Kind.DUAL}


def trace_map(c: ComplexSkeleton, k: int, kind: str | Kind = Kind.PRIMAL) -> LinearMap:
    """Restriction of k-cochains to the boundary.

    For primal cochains this selects boundary k-simplices, with the sign of
    the boundary's induced orientation for k >= 1.  The dual trace is
    defined for dual 0-cochains only: each dual boundary point takes the
    value at the circumcenter of the unique top simplex behind it.
    """
    kind = _TRACE_KINDS.get(kind, kind)
    n = c.dimension
    if kind == Kind.PRIMAL:
        if not 0 <= k <= n - 1:
            raise InvalidArgument(f"no boundary cells of degree {k} on a {n}-complex")
        idx = c.boundary_cells[k]
        m = sp.csr_matrix(
            (c.boundary_signs[k].astype(float), (np.arange(len(idx)), idx)),
            shape=(len(idx), c.count(k)),
        )
        return LinearMap(primal_space(c, k), primal_boundary_space(c, k), m)
    if kind == Kind.DUAL:
        if k != 0:
            raise InvalidArgument("the dual trace is only defined for dual 0-cochains")
        facets = c.boundary_cells[n - 1]
        top = abs(c.incidence[n]).tocsr()[facets]
        cols = top.indices
        m = sp.csr_matrix((np.ones(len(facets)), (np.arange(len(facets)), cols)), shape=(len(facets), c.count(n)))
        return LinearMap(dual_space(c, 0), dual_boundary_space(c, 0), m)
    raise InvalidArgument(f"trace of {kind!r} cochains is not defined")


def boundary_dual_derivative(c: ComplexSkeleton, degree: int) -> LinearMap:
    """d_b^{n-q} = (-1)^{n-p} (tr^{n-p})^T, dual-boundary ``degree`` -> interior dual ``degree + 1``."""
    n = c.dimension
    q = n - degree
    p = n + 1 - q
    signs.check_pq(n, p, q)
    tr = trace_map(c, n - p)
    return tr.transpose(dual_boundary_space(c, degree), dual_space(c, degree + 1)) * signs.boundary_derivative_sign(n, p)


def hodge_star(c: ComplexSkeleton, k: int) -> LinearMap:
    """Diagonal star from primal k to interior-dual (n-k): dual measure / primal measure."""
    n = c.dimension
    if not 0 <= k <= n:
        raise InvalidArgument(f"hodge star degree {k} outside [0, {n}]")
    primal = c.primal_measures[k]
    if np.any(~(primal > 0)):
        raise SingularOperator(f"zero primal measure among degree-{k} simplices {np.flatnonzero(~(primal > 0)).tolist()}")
    return LinearMap(primal_space(c, k), dual_space(c, n - k), sp.diags(c.dual_measures[k] / primal, format="csr"))


def dual_hodge_star(c: ComplexSkeleton, degree: int) -> LinearMap:
    """Star from interior-dual ``degree`` back to primal (n - degree).

    Inverse of :func:`hodge_star` up to the sign ``(-1)^{k(n-k)}``.
    """
    n = c.dimension
    k = n - degree
    star = hodge_star(c, k)
    dual = c.dual_measures[k]
    if np.any(~(dual > 0)):
        raise SingularOperator(f"zero dual measure among duals of degree-{k} simplices")
    inv = sp.diags(signs.hodge_round_trip_sign(n, k) / star.matrix.diagonal(), format="csr")
    return LinearMap(dual_space(c, degree), primal_space(c, k), inv)


def complementary(a: CochainSpace, b: CochainSpace) -> bool:
    if a.n != b.n or a.dimension != b.dimension:
        return False
    pair = {a.kind, b.kind}
    if pair == {Kind.PRIMAL, Kind.DUAL}:
        return a.degree + b.degree == a.n
    if pair == {Kind.PRIMAL_BOUNDARY, Kind.DUAL_BOUNDARY}:
        return a.degree + b.degree == a.n - 1
    return False


def pairing_sign(left: CochainSpace, right: CochainSpace) -> int:
    """Sign of ``<left ^ right>`` relative to the plain dot product."""
    if not complementary(left, right):
        raise TypeMismatch(f"{left} and {right} are not complementary")
    if left.kind.is_dual:
        return signs.wedge_sign(left.degree, right.degree)
    return 1


def duality_pairing(a: Cochain, b: Cochain) -> float:
    """Discrete wedge ``<a ^ b, K>`` (or over the boundary) of complementary cochains.

    Primal-first products are the dot product of the value vectors; putting
    the dual factor first multiplies by ``(-1)^{deg a * deg b}``.
    """
    return pairing_sign(a.space, b.space) * float(np.dot(a.values, b.values))


def format_operator(op: LinearMap, name: str = "") -> str:
    """A JSON header line followed by ``row col value`` triplets in row-major order."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    header = {
        "name": name,
        "domain": op.domain.to_dict(),
        "codomain": op.codomain.to_dict(),
        "shape": list(op.matrix.shape),
        "nnz": int(coo.nnz),
    }
    lines = ["# " + json.dumps(header)]
    lines += [f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}" for i in order]
    return "\n".join(lines) + "\n"


def export_operator(op: LinearMap, path, name: str = "") -> None:
    Path(path).write_text(format_operator(op, name), encoding="utf-8")


def load_operator(path) -> LinearMap:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# "):
        raise InvalidArgument(f"{path}: missing operator header")
    header = json.loads(text[0][2:])
    trip = np.loadtxt(text[1:], ndmin=2) if len(text) > 1 else np.zeros((0, 3))
    shape = tuple(header["shape"])
    m = sp.csr_matrix((trip[:, 2], (trip[:, 0].astype(int), trip[:, 1].astype(int))), shape=shape)
    return LinearMap(CochainSpace.from_dict(header["domain"]), CochainSpace.from_dict(header["codomain"]), m)
