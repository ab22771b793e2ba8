"""Conforming triangle meshes: construction, geometry queries and
longest-edge bisection refinement with conformity closure.

A mesh is immutable once built; refinement returns a new mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQUARE = "square"
LSHAPE = "l-shape"


class MeshError(Exception):
    """Invalid mesh query: unknown element id or point outside the domain."""


@dataclass(frozen=True)
class DomainSpec:
    """Computational domain: unit square (0,1)^2 or the L-shaped domain
    (-1,1)^2 minus the quadrant [0,1)x(-1,0]."""

    kind: str = SQUARE
    subdivisions: int = 1

    def __post_init__(self):
        if self.kind not in (SQUARE, LSHAPE):
            raise ValueError("unknown domain kind %r" % (self.kind,))
        if self.subdivisions < 1:
            raise ValueError("subdivisions must be >= 1")

    @property
    def area(self) -> float:
        return 1.0 if self.kind == SQUARE else 3.0

    def boundary_polygon(self) -> np.ndarray:
        if self.kind == SQUARE:
            return np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
        return np.array(
            [(-1, -1), (0, -1), (0, 0), (1, 0), (1, 1), (-1, 1)], dtype=float
        )

    def boundary_distance(self, p) -> float:
        """Distance from an interior point to the domain boundary."""
        p = np.asarray(p, dtype=float)
        poly = self.boundary_polygon()
        a = poly
        b = np.roll(poly, -1, axis=0)
        ab = b - a
        t = np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab)
        t = np.clip(t, 0.0, 1.0)
        proj = a + t[:, None] * ab
        return float(np.min(np.hypot(*(p - proj).T)))


class Mesh:
    """Conforming triangulation with full edge adjacency.

    Attributes
    ----------
    vertices : (V, 2) float array
    elements : (M, 3) int array, counterclockwise vertex triples
    edges : (E, 2) int array, each row sorted, rows in lexicographic order
    edge_elements : (E, 2) int array of incident elements, -1 marks "none"
    element_edges : (M, 3) int array; local edge j is opposite local vertex j
    boundary_edge, boundary_vertex : boolean masks
    longest_edge : (M,) local index of the longest edge (ties broken by
        lowest global edge id)
    h : (M,) longest edge length, area : (M,) element areas
    """

    def __init__(self, vertices, elements):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        elements = np.ascontiguousarray(elements, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("vertices must be (V, 2)")
        if elements.ndim != 2 or elements.shape[1] != 3:
            raise ValueError("elements must be (M, 3)")
        self.vertices = vertices
        self.elements = elements
        m = elements.shape[0]

        coords = vertices[elements]  # (M, 3, 2)
        d1 = coords[:, 1] - coords[:, 0]
        d2 = coords[:, 2] - coords[:, 0]
        self.area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.any(self.area <= 0):
            raise ValueError("all elements must be counterclockwise")

        # local edge j connects vertices (j+1) % 3 and (j+2) % 3
        pair_list = []
        for j in range(3):
            pa = elements[:, (j + 1) % 3]
            pb = elements[:, (j + 2) % 3]
            pair_list.append(np.sort(np.stack([pa, pb], axis=1), axis=1))
        all_pairs = np.concatenate(pair_list, axis=0)  # (3M, 2)
        edges, inv = np.unique(all_pairs, axis=0, return_inverse=True)
        self.edges = edges
        self.element_edges = inv.reshape(3, m).T.copy()

        ne = edges.shape[0]
        counts = np.bincount(inv, minlength=ne)
        if counts.max(initial=0) > 2:
            raise ValueError("edge shared by more than two elements")
        owner = np.tile(np.arange(m, dtype=np.int64), 3)
        order = np.argsort(inv, kind="stable")
        starts = np.concatenate([[0], np.cumsum(counts)])
        edge_elements = np.full((ne, 2), -1, dtype=np.int64)
        edge_elements[:, 0] = owner[order[starts[:-1]]]
        has2 = counts == 2
        edge_elements[has2, 1] = owner[order[starts[:-1][has2] + 1]]
        # lowest incident element first
        edge_elements[has2] = np.sort(edge_elements[has2], axis=1)
        self.edge_elements = edge_elements
        self.boundary_edge = counts == 1
        bv = np.zeros(vertices.shape[0], dtype=bool)
        bv[edges[self.boundary_edge].ravel()] = True
        self.boundary_vertex = bv

        self.edge_length = np.hypot(
            *(vertices[edges[:, 0]] - vertices[edges[:, 1]]).T
        )
        ell = self.edge_length[self.element_edges]  # (M, 3)
        lmax = ell.max(axis=1)
        tie = ell >= lmax[:, None] * (1.0 - 1e-12)
        gid = np.where(tie, self.element_edges, np.iinfo(np.int64).max)
        self.longest_edge = np.argmin(gid, axis=1)
        self.h = lmax

        for a in (self.vertices, self.elements, self.edges, self.edge_elements,
                  self.element_edges, self.area, self.h, self.edge_length):
            a.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def element_coords(self, t) -> np.ndarray:
        return self.vertices[self.elements[t]]

    def barycentric(self, point) -> np.ndarray:
        """Barycentric coordinates of a point w.r.t. every element, (M, 3)."""
        p = np.asarray(point, dtype=float)
        coords = self.vertices[self.elements]
        v0 = coords[:, 0]
        d1 = coords[:, 1] - v0
        d2 = coords[:, 2] - v0
        r = p[None, :] - v0
        det = 2.0 * self.area
        l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=1)

    def containing_elements(self, point) -> np.ndarray:
        """Ids of all elements whose closed triangle contains the point."""
        lam = self.barycentric(point)
        tol = 1e-12
        return np.nonzero(np.all(lam >= -tol, axis=1))[0]

    def locate(self, point) -> int:
        """Element containing the point; lowest id wins on shared sides."""
        ids = self.containing_elements(point)
        if ids.size == 0:
            raise MeshError("point %s lies outside the mesh" % (point,))
        return int(ids[0])

    def min_angle(self) -> float:
        """Smallest interior angle over all elements, in radians."""
        coords = self.vertices[self.elements]
        angles = []
        for j in range(3):
            u = coords[:, (j + 1) % 3] - coords[:, j]
            v = coords[:, (j + 2) % 3] - coords[:, j]
            cosang = np.einsum("ij,ij->i", u, v) / (
                np.hypot(*u.T) * np.hypot(*v.T)
            )
            angles.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
        return float(np.min(angles))

    def validate(self):
        """Exhaustive conformity scan; raises MeshError on violation."""
        counts = np.where(self.edge_elements >= 0, 1, 0).sum(axis=1)
        interior_bad = (~self.boundary_edge) & (counts != 2)
        boundary_bad = self.boundary_edge & (counts != 1)
        if interior_bad.any() or boundary_bad.any():
            raise MeshError("edge incidence counts are inconsistent")
        if np.any(self.area <= 0):
            raise MeshError("nonpositive element area")

    def dump(self) -> str:
        """Plain-text dump: header, vertex block, element block."""
        lines = ["mesh 2d", "vertices %d" % self.num_vertices]
        lines += ["%.17g %.17g" % (x, y) for x, y in self.vertices]
        lines.append("elements %d" % self.num_elements)
        lines += ["%d %d %d" % (i, j, k) for i, j, k in self.elements]
        return "\n".join(lines) + "\n"


def build_initial_mesh(domain: DomainSpec) -> Mesh:
    """Uniform initial mesh: each unit-grid cell is split by the diagonal
    of positive slope into two triangles."""
    n = domain.subdivisions
    h = 1.0 / n
    if domain.kind == SQUARE:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    else:
        x0, x1, y0, y1 = -1.0, 1.0, -1.0, 1.0
    nx = int(round((x1 - x0) / h))
    ny = int(round((y1 - y0) / h))

    index = {}
    verts = []

    def vid(i, j):
        key = (i, j)
        if key not in index:
            index[key] = len(verts)
            verts.append((x0 + i * h, y0 + j * h))
        return index[key]

    tris = []
    for j in range(ny):
        for i in range(nx):
            cx = x0 + (i + 0.5) * h
            cy = y0 + (j + 0.5) * h
            if domain.kind == LSHAPE and cx > 0 and cy < 0:
                continue
            v00 = vid(i, j)
            v10 = vid(i + 1, j)
            v11 = vid(i + 1, j + 1)
            v01 = vid(i, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return Mesh(np.array(verts), np.array(tris))


def element_geometry(mesh: Mesh, t: int, w=None) -> dict:
    """Geometry record for an element: longest edge, area and the indicator
    distance D (max vertex distance to the source; min over sources for the
    multi-source weight).  Exact because x -> |x - z| is convex on a simplex.
    """
    if not 0 <= t < mesh.num_elements:
        raise MeshError("unknown element id %d" % t)
    out = {"h_T": float(mesh.h[t]), "area": float(mesh.area[t])}
    if w is not None:
        coords = mesh.element_coords(t)
        sources = np.atleast_2d(np.asarray(w.sources, dtype=float))
        dmax = np.hypot(
            *(coords[None, :, :] - sources[:, None, :]).reshape(-1, 2).T
        ).reshape(len(sources), 3).max(axis=1)
        out["D"] = float(dmax.min())
    return out


class _Refiner:
    """Mutable view of a mesh used by longest-edge bisection."""

    def __init__(self, mesh: Mesh):
        self.verts = [tuple(v) for v in mesh.vertices]
        self.tris = [tuple(t) for t in mesh.elements]
        self.edge2els = {}
        for t, tri in enumerate(self.tris):
            for e in self._tri_edges(tri):
                self.edge2els.setdefault(e, set()).add(t)
        self.mid = {}

    @staticmethod
    def _tri_edges(tri):
        a, b, c = tri
        return (
            (a, b) if a < b else (b, a),
            (b, c) if b < c else (c, b),
            (a, c) if a < c else (c, a),
        )

    def _length2(self, e):
        (xa, ya), (xb, yb) = self.verts[e[0]], self.verts[e[1]]
        return (xa - xb) ** 2 + (ya - yb) ** 2

    def longest_edge_of(self, t):
        edges = self._tri_edges(self.tris[t])
        lens = [self._length2(e) for e in edges]
        lmax = max(lens)
        # ties broken by lowest sorted vertex pair, deterministic
        return min(e for e, l in zip(edges, lens) if l >= lmax * (1 - 1e-12))

    def neighbor(self, t, e):
        other = self.edge2els[e] - {t}
        return next(iter(other)) if other else None

    def alive(self, t):
        return self.tris[t] is not None

    def midpoint(self, e):
        if e not in self.mid:
            (xa, ya), (xb, yb) = self.verts[e[0]], self.verts[e[1]]
            self.mid[e] = len(self.verts)
            self.verts.append((0.5 * (xa + xb), 0.5 * (ya + yb)))
        return self.mid[e]

    def bisect_element(self, t):
        """Rivara bisection: refine the neighbor first whenever the shared
        longest edge is not also the neighbor's longest edge."""
        while self.alive(t):
            e = self.longest_edge_of(t)
            nb = self.neighbor(t, e)
            if nb is None or self.longest_edge_of(nb) == e:
                m = self.midpoint(e)
                self._split(t, e, m)
                if nb is not None:
                    self._split(nb, e, m)
                return
            self.bisect_element(nb)

    def _split(self, t, e, m):
        tri = self.tris[t]
        # rotate so the split edge comes first, preserving orientation
        k = next(j for j in range(3)
                 if {tri[j], tri[(j + 1) % 3]} == {e[0], e[1]})
        a, b, c = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
        for old in self._tri_edges(tri):
            self.edge2els[old].discard(t)
        self.tris[t] = None
        for child in ((a, m, c), (m, b, c)):
            cid = len(self.tris)
            self.tris.append(child)
            for ce in self._tri_edges(child):
                self.edge2els.setdefault(ce, set()).add(cid)

    def finish(self) -> Mesh:
        alive = [tri for tri in self.tris if tri is not None]
        return Mesh(np.array(self.verts), np.array(alive))


def bisect(mesh: Mesh, marked) -> Mesh:
    """Bisect every marked element across its longest edge, recursively
    refining neighbors until the mesh is conforming again."""
    marked = sorted(set(int(t) for t in marked))
    if marked and (marked[0] < 0 or marked[-1] >= mesh.num_elements):
        raise MeshError("marked set contains unknown element ids")
    if not marked:
        return mesh
    r = _Refiner(mesh)
    for t in marked:
        if r.alive(t):
            r.bisect_element(t)
    return r.finish()
