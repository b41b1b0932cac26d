"""Oriented simplicial complexes with circumcentric duals.

A :class:`ComplexSkeleton` holds everything the operators need: simplices
of every degree, signed incidence matrices, circumcenters, primal and dual
cell measures, and the boundary cell lists.  Dual cells of boundary
simplices are truncated at the geometric boundary, and the dual boundary
complex consists of those truncated cells' intersections with the boundary.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, WellCenterednessError

MESH_FORMAT = "stokesdirac-mesh"
MESH_VERSION = 1


def _frozen(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ComplexSkeleton:
    """An oriented 1D or 2D simplicial complex and its circumcentric dual.

    Attributes:
        dimension: n, the top simplex degree (1 or 2).
        vertices: (V, n) coordinates.
        simplices: per degree k, an (N_k, k+1) array of sorted vertex indices.
        orientations: +1/-1 per top simplex, relative to its sorted vertex order.
        primal_measures: per degree, length/area of each simplex (1 for vertices).
        dual_measures: per degree, measure of the dual cell of each simplex,
            truncated at the boundary (1 for dual points).
        boundary_cells: per degree k < n, indices of boundary k-simplices.
        boundary_signs: per degree k < n, orientation sign each boundary
            k-cell inherits from the boundary (points are unsigned).
        dual_boundary_measures: per degree k < n, measure of the dual boundary
            cell attached to each boundary k-simplex.
    """

    dimension: int
    vertices: np.ndarray
    simplices: tuple
    orientations: np.ndarray
    incidence: tuple = field(repr=False)
    circumcenters: tuple = field(repr=False)
    primal_measures: tuple = field(repr=False)
    dual_measures: tuple = field(repr=False)
    boundary_flags: tuple = field(repr=False)
    boundary_cells: tuple = field(repr=False)
    boundary_signs: tuple = field(repr=False)
    dual_boundary_measures: tuple = field(repr=False)

    @classmethod
    def from_simplices(cls, vertices, top_simplices, orientations=None) -> "ComplexSkeleton":
        """Build a complex from vertex coordinates and top simplices.

        Top simplices are oriented by geometry (increasing coordinate in 1D,
        counterclockwise in 2D) unless ``orientations`` overrides them.
        Degenerate geometry is accepted here; :func:`validate_complex`
        reports it.
        """
        tops = np.asarray(top_simplices, dtype=np.int64)
        if tops.ndim != 2 or tops.shape[0] == 0:
            raise InvalidArgument("need a non-empty (N, n+1) array of top simplices")
        n = tops.shape[1] - 1
        if n not in (1, 2):
            raise InvalidArgument(f"only 1D and 2D complexes are supported, got n={n}")
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim == 1:
            verts = verts[:, None]
        if verts.shape[1] != n:
            raise InvalidArgument(f"vertices must have {n} coordinates, got {verts.shape[1]}")
        if tops.min() < 0 or tops.max() >= len(verts):
            raise InvalidArgument("top simplex references a missing vertex")

        sorted_tops = np.sort(tops, axis=1)
        if orientations is None:
            orient = np.array([_geometric_orientation(verts[s]) for s in sorted_tops], dtype=np.int64)
        else:
            orient = np.asarray(orientations, dtype=np.int64)
            if orient.shape != (len(tops),) or not np.all(np.abs(orient) == 1):
                raise InvalidArgument("orientations must be one +1/-1 per top simplex")

        simplices = [None] * (n + 1)
        simplices[n] = sorted_tops
        for k in range(n - 1, -1, -1):
            faces = {f for s in simplices[k + 1] for f in itertools.combinations(s.tolist(), k + 1)}
            simplices[k] = np.array(sorted(faces), dtype=np.int64).reshape(-1, k + 1)
        if len(simplices[0]) != len(verts):
            raise InvalidArgument("every vertex must belong to some top simplex")

        incidence = [None]
        for k in range(1, n + 1):
            sign = orient if k == n else np.ones(len(simplices[k]), dtype=np.int64)
            incidence.append(_incidence(simplices[k - 1], simplices[k], sign))

        centers, primal = _circumcenters_and_measures(verts, simplices)
        flags, bcells, bsigns = _boundary(n, simplices, incidence)
        dual = _dual_measures(n, verts, simplices, centers, incidence)
        dual_b = _dual_boundary_measures(n, simplices, primal, bcells)

        return cls(
            dimension=n,
            vertices=_frozen(verts),
            simplices=tuple(_frozen(s) for s in simplices),
            orientations=_frozen(orient),
            incidence=tuple(incidence),
            circumcenters=tuple(_frozen(c) for c in centers),
            primal_measures=tuple(_frozen(m) for m in primal),
            dual_measures=tuple(_frozen(m) for m in dual),
            boundary_flags=tuple(_frozen(f) for f in flags),
            boundary_cells=tuple(_frozen(b) for b in bcells),
            boundary_signs=tuple(_frozen(s) for s in bsigns),
            dual_boundary_measures=tuple(_frozen(m) for m in dual_b),
        )

    def count(self, k: int) -> int:
        return len(self.simplices[k])

    def boundary_count(self, k: int) -> int:
        return len(self.boundary_cells[k])

    def boundary_operator(self, k: int) -> sp.csr_matrix:
        """Signed incidence matrix from k-simplices to (k-1)-simplices (integer)."""
        if not 1 <= k <= self.dimension:
            raise InvalidArgument(f"boundary operator degree {k} outside [1, {self.dimension}]")
        return self.incidence[k]

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.primal_measures[self.dimension]))

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(self.dimension + 1))

    # serialization

    def to_json_dict(self) -> dict:
        n = self.dimension
        simplices = {}
        for k in range(n + 1):
            if k == n:
                simplices[str(k)] = [
                    {"vertices": s.tolist(), "orientation": int(o)}
                    for s, o in zip(self.simplices[k], self.orientations)
                ]
            else:
                simplices[str(k)] = [{"vertices": s.tolist(), "orientation": 1} for s in self.simplices[k]]
        return {
            "format": MESH_FORMAT,
            "version": MESH_VERSION,
            "dimension": n,
            "vertices": self.vertices.tolist(),
            "simplices": simplices,
            "boundary": {str(k): self.boundary_flags[k].astype(int).tolist() for k in range(n + 1)},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ComplexSkeleton":
        if doc.get("format") != MESH_FORMAT:
            raise InvalidArgument(f"not a mesh document (format={doc.get('format')!r})")
        if doc.get("version") != MESH_VERSION:
            raise InvalidArgument(f"unsupported mesh version {doc.get('version')!r}")
        n = int(doc["dimension"])
        tops = doc["simplices"][str(n)]
        c = cls.from_simplices(
            doc["vertices"],
            [t["vertices"] for t in tops],
            [t["orientation"] for t in tops],
        )
        stored = doc.get("boundary")
        if stored is not None:
            for k in range(n + 1):
                if np.asarray(stored[str(k)], dtype=bool).tolist() != c.boundary_flags[k].tolist():
                    raise InvalidArgument(f"stored boundary flags of degree {k} disagree with topology")
        return c

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ComplexSkeleton":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _geometric_orientation(points) -> int:
    edges = points[1:] - points[0]
    det = np.linalg.det(edges) if edges.shape[0] > 1 else edges[0, 0]
    return -1 if det < 0 else 1


def _incidence(faces, simplices, orientation):
    index = {tuple(f): i for i, f in enumerate(faces.tolist())}
    rows, cols, vals = [], [], []
    for j, s in enumerate(simplices.tolist()):
        for i in range(len(s)):
            rows.append(index[tuple(s[:i] + s[i + 1:])])
            cols.append(j)
            vals.append(orientation[j] * (-1) ** i)
    m = sp.csr_matrix((vals, (rows, cols)), shape=(len(faces), len(simplices)), dtype=np.int64)
    m.sort_indices()
    return m


def _circumcenter(points):
    if len(points) == 1:
        return points[0]
    if len(points) == 2:
        return 0.5 * (points[0] + points[1])
    a, b, c = points
    ab, ac = b - a, c - a
    d = 2.0 * (ab[0] * ac[1] - ab[1] * ac[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (ac[1] * ab.dot(ab) - ab[1] * ac.dot(ac)) / d
        uy = (ab[0] * ac.dot(ac) - ac[0] * ab.dot(ab)) / d
    return a + np.array([ux, uy])


def _measure(points):
    if len(points) == 1:
        return 1.0
    edges = points[1:] - points[0]
    if len(edges) == 1:
        return float(np.linalg.norm(edges[0]))
    return 0.5 * abs(float(edges[0, 0] * edges[1, 1] - edges[0, 1] * edges[1, 0]))


def _circumcenters_and_measures(verts, simplices):
    centers, measures = [], []
    for s in simplices:
        centers.append(np.array([_circumcenter(verts[t]) for t in s]).reshape(len(s), verts.shape[1]))
        measures.append(np.array([_measure(verts[t]) for t in s], dtype=float))
    return centers, measures


def _boundary(n, simplices, incidence):
    top = abs(incidence[n])
    cofaces = np.asarray(top.sum(axis=1)).ravel()
    flags = [np.zeros(len(s), dtype=bool) for s in simplices]
    flags[n - 1] = cofaces == 1
    facet_sign = np.asarray(incidence[n].sum(axis=1)).ravel()
    for k in range(n - 2, -1, -1):
        below = abs(incidence[k + 1])[:, flags[k + 1]]
        flags[k] = np.asarray(below.sum(axis=1)).ravel() > 0
    cells, signs = [], []
    for k in range(n):
        idx = np.flatnonzero(flags[k])
        cells.append(idx)
        if k == 0:
            signs.append(np.ones(len(idx), dtype=np.int64))
        else:
            signs.append(facet_sign[idx].astype(np.int64))
    return flags, cells, signs


def _signed_distance(point, a, b, opposite):
    """Distance from ``point`` to line ab, positive on the side of ``opposite``."""
    t = b - a
    normal = np.array([-t[1], t[0]])
    length = np.linalg.norm(normal)
    with np.errstate(divide="ignore", invalid="ignore"):
        normal = normal / length
    if np.dot(opposite - a, normal) < 0:
        normal = -normal
    return float(np.dot(point - 0.5 * (a + b), normal))


def _dual_measures(n, verts, simplices, centers, incidence):
    dual = [np.zeros(len(s)) for s in simplices]
    dual[n][:] = 1.0
    if n == 1:
        for j, (a, b) in enumerate(simplices[1]):
            half = 0.5 * abs(verts[b, 0] - verts[a, 0])
            dual[0][a] += half
            dual[0][b] += half
        return dual

    edge_index = {tuple(e): i for i, e in enumerate(simplices[1].tolist())}
    for t, tri in enumerate(simplices[2].tolist()):
        cc = centers[2][t]
        for i in range(3):
            a, b = sorted((tri[i], tri[(i + 1) % 3]))
            opp = tri[(i + 2) % 3]
            h = _signed_distance(cc, verts[a], verts[b], verts[opp])
            length = float(np.linalg.norm(verts[b] - verts[a]))
            dual[1][edge_index[(a, b)]] += h
            # the kite piece of this edge's half next to each endpoint
            dual[0][a] += 0.5 * (0.5 * length) * h
            dual[0][b] += 0.5 * (0.5 * length) * h
    return dual


def _dual_boundary_measures(n, simplices, primal, bcells):
    out = [np.ones(len(b)) for b in bcells]
    if n == 2:
        bedges = bcells[1]
        per_vertex = np.zeros(len(simplices[0]))
        for e in bedges:
            for v in simplices[1][e]:
                per_vertex[v] += 0.5 * primal[1][e]
        out[0] = per_vertex[bcells[0]]
    return out


def build_interval_complex(length: float, cells: int) -> ComplexSkeleton:
    """Uniform subdivision of ``[0, length]`` into ``cells`` edges."""
    if not isinstance(cells, (int, np.integer)) or cells < 1:
        raise InvalidArgument(f"cells must be an integer >= 1, got {cells!r}")
    if not np.isfinite(length) or length <= 0:
        raise InvalidArgument(f"length must be positive, got {length!r}")
    x = np.linspace(0.0, float(length), cells + 1)
    edges = np.column_stack([np.arange(cells), np.arange(1, cells + 1)])
    return ComplexSkeleton.from_simplices(x, edges)


def build_triangle_strip_complex(rows: int, cols: int, edge_len: float = 1.0) -> ComplexSkeleton:
    """A rows x cols strip of equilateral triangles (two per quad cell).

    Alternate vertex rows are shifted by half an edge so every triangle is
    equilateral and strictly contains its circumcenter.
    """
    for name, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise InvalidArgument(f"{name} must be an integer >= 1, got {v!r}")
    if not np.isfinite(edge_len) or edge_len <= 0:
        raise InvalidArgument(f"edge_len must be positive, got {edge_len!r}")
    h = float(edge_len)
    height = h * np.sqrt(3.0) / 2.0
    verts = [((i + 0.5 * (j % 2)) * h, j * height) for j in range(rows + 1) for i in range(cols + 1)]

    def vid(i, j):
        return j * (cols + 1) + i

    tris = []
    for j in range(rows):
        for i in range(cols):
            b0, b1, t0, t1 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            if j % 2 == 0:
                tris += [(b0, b1, t0), (b1, t1, t0)]
            else:
                tris += [(b0, t1, t0), (b0, b1, t1)]
    c = ComplexSkeleton.from_simplices(np.array(verts), tris)
    bad = _not_well_centered(c)
    if len(bad):
        raise WellCenterednessError(f"triangles {bad.tolist()} do not contain their circumcenters")
    return c


def _not_well_centered(c: ComplexSkeleton) -> np.ndarray:
    n = c.dimension
    bad = []
    for t, s in enumerate(c.simplices[n]):
        p = c.vertices[s]
        cc = c.circumcenters[n][t]
        if n == 1:
            lo, hi = sorted((p[0, 0], p[1, 0]))
            inside = lo < cc[0] < hi
        else:
            m = np.column_stack([p[1] - p[0], p[2] - p[0]])
            with np.errstate(all="ignore"):
                try:
                    lam = np.linalg.solve(m, cc - p[0])
                except np.linalg.LinAlgError:
                    lam = np.array([np.nan, np.nan])
            inside = bool(np.all(lam > 0) and lam.sum() < 1)
        if not inside:
            bad.append(t)
    return np.array(bad, dtype=np.int64)


@dataclass
class Check:
    name: str
    passed: bool
    offending: list = field(default_factory=list)
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "offending": self.offending, "detail": self.detail}


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def __getitem__(self, name: str) -> Check:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [ch.to_dict() for ch in self.checks]}


def validate_complex(c: ComplexSkeleton) -> ValidationReport:
    """Check every structural invariant; failures are reported, not raised."""
    n = c.dimension
    checks = []

    bad = []
    for k in range(2, n + 1):
        prod = (c.incidence[k - 1] @ c.incidence[k]).tocoo()
        nz = prod.data != 0
        bad += [[k, int(i), int(j)] for i, j in zip(prod.row[nz], prod.col[nz])]
    checks.append(Check("boundary_of_boundary", not bad, bad, "integer product of consecutive incidence matrices"))

    row_sums = np.asarray(c.incidence[n].sum(axis=1)).ravel()
    cofaces = np.asarray(abs(c.incidence[n]).sum(axis=1)).ravel()
    bad = [int(i) for i in np.flatnonzero(((cofaces == 2) & (row_sums != 0)) | ((cofaces == 1) & (np.abs(row_sums) != 1)))]
    checks.append(Check("orientation_consistency", not bad, bad, "neighbouring top simplices induce opposite facet orientations"))

    bad = [[k, int(i)] for k in range(1, n + 1) for i in np.flatnonzero(~(c.primal_measures[k] > 0))]
    checks.append(Check("positive_primal_measure", not bad, bad))

    bad = [[k, int(i)] for k in range(n + 1) for i in np.flatnonzero(~(c.dual_measures[k] > 0))]
    checks.append(Check("positive_dual_measure", not bad, bad))

    bad = _not_well_centered(c).tolist()
    checks.append(Check("well_centered", not bad, bad, "circumcenter strictly inside each top simplex"))

    bad = [int(i) for i in np.flatnonzero((cofaces == 1) != c.boundary_flags[n - 1])]
    bad += [int(i) for i in np.flatnonzero(cofaces > 2)]
    checks.append(Check("boundary_facets", not bad, bad, "boundary facets are the faces with exactly one top coface"))

    if n == 1:
        ok = c.boundary_count(0) == len(c.dual_boundary_measures[0])
        checks.append(Check("boundary_count", ok, [] if ok else [c.boundary_count(0)]))

    total = c.total_measure
    dual_total = float(np.sum(c.dual_measures[0]))
    ok = bool(np.isfinite(dual_total) and abs(dual_total - total) <= 1e-12 * max(abs(total), 1e-300))
    checks.append(Check("dual_measure_sum", ok, [] if ok else [dual_total, total], "vertex dual cells tile the domain"))

    chi = c.euler_characteristic()
    checks.append(Check("euler_characteristic", chi == 1, [] if chi == 1 else [chi], "V - E (+ F) of a disk/interval"))
    return ValidationReport(checks)
