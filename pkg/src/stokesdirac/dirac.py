"""Simplicial Dirac structures and the canonical Poisson map as block operators.

Every structure here is the graph of a block map from efforts to flows.
Each block remembers the operator it came from and the sign it carries, so
a structure can be audited against the operator library entry by entry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import signs
from .dec_ops import (
    Cochain,
    CochainSpace,
    LinearMap,
    boundary_dual_derivative,
    dual_boundary_space,
    dual_exterior_derivative,
    dual_space,
    exterior_derivative,
    identity_map,
    pairing_sign,
    primal_boundary_space,
    primal_space,
    trace_map,
)
from .errors import InvalidArgument, TypeMismatch
from .mesh import ComplexSkeleton

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Block:
    """One block of a structure: ``sign * op``."""

    op: LinearMap
    sign: int = 1
    source: str = ""

    @property
    def map(self) -> LinearMap:
        return self.op if self.sign == 1 else self.op * self.sign


@dataclass(frozen=True, eq=False)
class StructureMaps:
    """A named block operator from effort spaces (columns) to flow spaces (rows).

    ``pairing`` maps each flow row to the effort column it is paired with and
    a multiplier on that pairing term; structures used only as linear maps
    (tangent and cotangent maps) leave it empty.
    """

    name: str
    rows: tuple
    cols: tuple
    blocks: dict
    pairing: dict = field(default_factory=dict)

    def __post_init__(self):
        rs, cs = dict(self.rows), dict(self.cols)
        for (r, c), b in self.blocks.items():
            if r not in rs or c not in cs:
                raise InvalidArgument(f"block ({r}, {c}) is not a row/column of {self.name}")
            if b.op.codomain != rs[r] or b.op.domain != cs[c]:
                raise TypeMismatch(f"block ({r}, {c}) of {self.name} maps {b.op.domain} -> {b.op.codomain}")

    @property
    def row_names(self):
        return [r for r, _ in self.rows]

    @property
    def col_names(self):
        return [c for c, _ in self.cols]

    def row_space(self, name: str) -> CochainSpace:
        return dict(self.rows)[name]

    def col_space(self, name: str) -> CochainSpace:
        return dict(self.cols)[name]

    @property
    def flow_dimension(self) -> int:
        return sum(s.dimension for _, s in self.rows)

    @property
    def effort_dimension(self) -> int:
        return sum(s.dimension for _, s in self.cols)

    def block(self, row: str, col: str) -> LinearMap:
        """The signed block, or a zero map when absent."""
        if (row, col) in self.blocks:
            return self.blocks[row, col].map
        rs, cs = self.row_space(row), self.col_space(col)
        return LinearMap(cs, rs, sp.csr_matrix((rs.dimension, cs.dimension)))

    def matrix(self) -> sp.csr_matrix:
        grid = [[self.blocks[r, c].map.matrix if (r, c) in self.blocks else None for c, _ in self.cols]
                for r, _ in self.rows]
        # bmat needs at least one block per row and column to infer shapes
        for i, (r, rs) in enumerate(self.rows):
            for j, (c, cs) in enumerate(self.cols):
                if grid[i][j] is None:
                    grid[i][j] = sp.csr_matrix((rs.dimension, cs.dimension))
        return sp.bmat(grid, format="csr")

    def apply(self, efforts: dict) -> dict:
        """Map a dict of effort cochains (missing entries are zero) to flows."""
        for name, x in efforts.items():
            if x.space != self.col_space(name):
                raise TypeMismatch(f"effort {name} must live on {self.col_space(name)}, got {x.space}")
        out = {}
        for r, rs in self.rows:
            acc = np.zeros(rs.dimension)
            for c, _ in self.cols:
                if (r, c) in self.blocks and c in efforts:
                    acc += self.blocks[r, c].map.matrix @ efforts[c].values
            out[r] = Cochain(rs, acc)
        return out

    def compose(self, other: "StructureMaps", name: str = "") -> "StructureMaps":
        """``self`` after ``other``; ``other``'s rows must match ``self``'s columns."""
        if [s for _, s in other.rows] != [s for _, s in self.cols]:
            raise TypeMismatch(f"cannot compose {self.name} after {other.name}")
        link = dict(zip(other.row_names, self.col_names))
        blocks = {}
        for r, _ in self.rows:
            for c, _ in other.cols:
                acc = None
                for mid in other.row_names:
                    if (r, link[mid]) in self.blocks and (mid, c) in other.blocks:
                        term = self.blocks[r, link[mid]].map @ other.blocks[mid, c].map
                        acc = term if acc is None else acc + term
                if acc is not None:
                    blocks[r, c] = Block(acc, 1, "composite")
        return StructureMaps(name or f"{self.name}*{other.name}", self.rows, other.cols, blocks)

    def flipped(self, row: str, col: str) -> "StructureMaps":
        """Copy with one block's sign negated (mutation testing)."""
        if (row, col) not in self.blocks:
            raise InvalidArgument(f"{self.name} has no block ({row}, {col})")
        blocks = dict(self.blocks)
        b = blocks[row, col]
        blocks[row, col] = replace(b, sign=-b.sign)
        return replace(self, name=f"{self.name}[flip {row},{col}]", blocks=blocks)

    def pairing_matrix(self) -> sp.csr_matrix:
        """W with ``<x1, x2> = e1 . W f2 + e2 . W f1`` for graph elements."""
        if not self.pairing:
            raise InvalidArgument(f"{self.name} carries no pairing")
        row_off = np.cumsum([0] + [s.dimension for _, s in self.rows])
        col_off = np.cumsum([0] + [s.dimension for _, s in self.cols])
        rix = {r: i for i, r in enumerate(self.row_names)}
        cix = {c: j for j, c in enumerate(self.col_names)}
        diag = sp.lil_matrix((self.effort_dimension, self.flow_dimension))
        for r, (c, mult) in self.pairing.items():
            i, j = rix[r], cix[c]
            s = mult * pairing_sign(self.col_space(c), self.row_space(r))
            for t in range(self.row_space(r).dimension):
                diag[col_off[j] + t, row_off[i] + t] = s
        return diag.tocsr()


def max_block_difference(a: StructureMaps, b: StructureMaps) -> float:
    """Largest entrywise difference of two assembled structures on the same spaces."""
    if a.rows != b.rows or a.cols != b.cols:
        raise TypeMismatch(f"{a.name} and {b.name} act between different spaces")
    diff = abs(a.matrix() - b.matrix())
    return float(diff.max()) if diff.nnz else 0.0


# simplicial Dirac structure


@dataclass(frozen=True)
class FlowEffortSpaces:
    """Flow and effort spaces of the simplicial Dirac structure of degrees (p, q)."""

    complex: ComplexSkeleton
    p: int
    q: int

    def __post_init__(self):
        signs.check_pq(self.complex.dimension, self.p, self.q)

    @property
    def n(self) -> int:
        return self.complex.dimension

    @property
    def flows(self) -> dict:
        c, n, p, q = self.complex, self.n, self.p, self.q
        return {"f_p": dual_space(c, p), "f_q": primal_space(c, q), "f_b": primal_boundary_space(c, n - p)}

    @property
    def efforts(self) -> dict:
        c, n, p, q = self.complex, self.n, self.p, self.q
        return {"e_p": primal_space(c, n - p), "e_q": dual_space(c, n - q), "e_b": dual_boundary_space(c, n - q)}

    @property
    def flow_dimension(self) -> int:
        return sum(s.dimension for s in self.flows.values())

    @property
    def effort_dimension(self) -> int:
        return sum(s.dimension for s in self.efforts.values())


@dataclass(frozen=True, eq=False)
class DiracElement:
    f_p: Cochain
    f_q: Cochain
    f_b: Cochain
    e_p: Cochain
    e_q: Cochain
    e_b: Cochain

    def check(self, spaces: FlowEffortSpaces) -> None:
        want = {**spaces.flows, **spaces.efforts}
        for name, space in want.items():
            if getattr(self, name).space != space:
                raise TypeMismatch(f"{name} lives on {getattr(self, name).space}, expected {space}")


def bilinear_form(x1: DiracElement, x2: DiracElement) -> float:
    """Symmetric pairing of two flow-effort tuples."""
    from .dec_ops import duality_pairing as w

    for name in ("f_p", "f_q", "f_b", "e_p", "e_q", "e_b"):
        if getattr(x1, name).space != getattr(x2, name).space:
            raise TypeMismatch(f"{name} spaces differ between the two elements")
    return (
        w(x1.e_p, x2.f_p) + w(x1.e_q, x2.f_q) + w(x2.e_p, x1.f_p) + w(x2.e_q, x1.f_q)
        + w(x1.e_b, x2.f_b) + w(x2.e_b, x1.f_b)
    )


def simplicial_dirac(c: ComplexSkeleton, p: int, q: int) -> StructureMaps:
    """Block form of the simplicial Dirac structure of degrees (p, q)."""
    s = FlowEffortSpaces(c, p, q)
    n = c.dimension
    sr = signs.dirac_interior_sign(p, q)
    blocks = {
        ("f_p", "e_q"): Block(dual_exterior_derivative(c, n - q), sr, f"d_i^{n - q}"),
        ("f_p", "e_b"): Block(boundary_dual_derivative(c, n - q), sr, f"d_b^{n - q}"),
        ("f_q", "e_p"): Block(exterior_derivative(c, n - p), 1, f"d^{n - p}"),
        ("f_b", "e_p"): Block(trace_map(c, n - p), signs.dirac_trace_sign(p), f"tr^{n - p}"),
    }
    return StructureMaps(
        name=f"simplicial_dirac(n={n},p={p},q={q})",
        rows=tuple(s.flows.items()),
        cols=tuple(s.efforts.items()),
        blocks=blocks,
        pairing={"f_p": ("e_p", 1), "f_q": ("e_q", 1), "f_b": ("e_b", 1)},
    )


def simplicial_dirac_apply(s: FlowEffortSpaces, e_p: Cochain, e_q: Cochain, e_b: Cochain):
    """Flows ``(f_p, f_q, f_b)`` paired with the given efforts in the structure."""
    d = simplicial_dirac(s.complex, s.p, s.q)
    for name, x in (("e_p", e_p), ("e_q", e_q), ("e_b", e_b)):
        if x.space != s.efforts[name]:
            raise InvalidArgument(f"{name} must be a {s.efforts[name]} cochain, got {x.space}")
    out = d.apply({"e_p": e_p, "e_q": e_q, "e_b": e_b})
    return out["f_p"], out["f_q"], out["f_b"]


def dirac_element(s: FlowEffortSpaces, e_p: Cochain, e_q: Cochain, e_b: Cochain) -> DiracElement:
    f_p, f_q, f_b = simplicial_dirac_apply(s, e_p, e_q, e_b)
    return DiracElement(f_p, f_q, f_b, e_p, e_q, e_b)


# canonical Poisson map


@dataclass(frozen=True)
class PhaseSpace:
    """Spaces of the canonical port-Hamiltonian phase space with configuration degree k."""

    complex: ComplexSkeleton
    k: int

    def __post_init__(self):
        signs.check_nk(self.complex.dimension, self.k)

    @property
    def n(self) -> int:
        return self.complex.dimension

    @property
    def states(self) -> dict:
        c, n, k = self.complex, self.n, self.k
        return {"rho": primal_space(c, k), "pi": dual_space(c, n - k), "rho_b": primal_boundary_space(c, k)}

    @property
    def efforts(self) -> dict:
        c, n, k = self.complex, self.n, self.k
        return {"e_rho": dual_space(c, n - k), "e_pi": primal_space(c, k), "e_b": dual_boundary_space(c, n - k - 1)}


def canonical_sharp_map(c: ComplexSkeleton, k: int) -> StructureMaps:
    """Canonical Poisson map on the phase space of configuration degree k.

    Rows are the rates ``(rho_dot, pi_dot, rho_b_dot)``; the boundary port
    flow entering the pairing is ``-rho_b_dot``.
    """
    ps = PhaseSpace(c, k)
    n = c.dimension
    st, ef = ps.states, ps.efforts
    s1 = signs.canonical_sign(n, k)
    blocks = {
        ("rho_dot", "e_pi"): Block(identity_map(st["rho"]), 1, "I"),
        ("pi_dot", "e_rho"): Block(identity_map(st["pi"]), -s1, "I"),
        ("pi_dot", "e_b"): Block(boundary_dual_derivative(c, n - k - 1), -s1, f"d_b^{n - k - 1}"),
        ("rho_b_dot", "e_pi"): Block(trace_map(c, k), -1, f"tr^{k}"),
    }
    return StructureMaps(
        name=f"canonical_sharp(n={n},k={k})",
        rows=(("rho_dot", st["rho"]), ("pi_dot", st["pi"]), ("rho_b_dot", st["rho_b"])),
        cols=tuple(ef.items()),
        blocks=blocks,
        pairing={"rho_dot": ("e_rho", 1), "pi_dot": ("e_pi", 1), "rho_b_dot": ("e_b", signs.port_flow_sign())},
    )


def canonical_sharp(c: ComplexSkeleton, k: int, e_rho: Cochain, e_pi: Cochain, e_b: Cochain):
    """Rates ``(rho_dot, pi_dot, rho_b_dot)`` generated by the given efforts."""
    out = canonical_sharp_map(c, k).apply({"e_rho": e_rho, "e_pi": e_pi, "e_b": e_b})
    return out["rho_dot"], out["pi_dot"], out["rho_b_dot"]


# isotropy audit


@dataclass
class IsotropyReport:
    structure_id: str
    max_self_pairing: float
    max_cross_pairing: float
    dim_D: int
    dim_F: int
    passed: bool
    samples: int = 0
    tol: float = 0.0
    matrix_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "structure_id": self.structure_id,
            "max_self_pairing": self.max_self_pairing,
            "max_cross_pairing": self.max_cross_pairing,
            "dim_D": self.dim_D,
            "dim_F": self.dim_F,
            "pass": self.passed,
            "samples": self.samples,
            "tol": self.tol,
            "matrix_residual": self.matrix_residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def graph_rank(structure: StructureMaps) -> int:
    """Dimension of the graph ``{(M e, e)}`` by SVD with a relative cutoff."""
    m = structure.matrix().toarray()
    stacked = np.vstack([m, np.eye(structure.effort_dimension)])
    sv = np.linalg.svd(stacked, compute_uv=False)
    if sv.size == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def check_maximal_isotropy(D: StructureMaps, samples: int = 1000, tol: float = 1e-12,
                           rng: np.random.Generator | int | None = 0) -> IsotropyReport:
    """Sample graph elements, pair them all against each other, and count dim D."""
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    rng = np.random.default_rng(rng)
    m = D.matrix()
    w = D.pairing_matrix()
    e = rng.uniform(-1.0, 1.0, size=(D.effort_dimension, samples))
    f = m @ e
    g = e.T @ (w @ f)
    pair = g + g.T
    self_pairing = float(np.max(np.abs(np.diag(pair))))
    off = pair - np.diag(np.diag(pair))
    cross = float(np.max(np.abs(off))) if samples > 1 else 0.0
    wm = (w @ m).toarray()
    matrix_residual = float(np.max(np.abs(wm + wm.T))) if wm.size else 0.0
    dim_d = graph_rank(D)
    dim_f = D.flow_dimension
    ok = self_pairing < tol and cross < tol and dim_d == dim_f
    return IsotropyReport(D.name, self_pairing, cross, dim_d, dim_f, bool(ok), samples, tol, matrix_residual)
