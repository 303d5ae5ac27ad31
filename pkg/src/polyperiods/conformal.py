"""Discrete conformal structures on closed surfaces.

A :class:`WeightedSurfaceGraph` stores a cellular surface (the primal graph
and its faces) together with one positive weight per primal edge. The dual
graph, the double graph and the quad-graph are derived from it.

Orientation conventions
-----------------------
Faces are cycles of *darts* ``(edge, sign)``; ``sign=+1`` traverses the edge
from its tail to its head. Every face lies to the left of its darts. The face
containing ``(e, +1)`` is the *left* face of ``e``, the one containing
``(e, -1)`` the *right* face.

The dual edge ``e*`` runs from the right face to the left face, so that the
quadrilateral ``(tail, right, head, left)`` is positively oriented and the
pair ``(e, e*)`` behaves like ``(dx, dy)``. With this choice ``dz`` of a flat
coordinate is a form of type (1,0).

Weights live on primal edges only; the weight of ``e*`` is ``1 / rho[e]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DelaunayViolation, TopologyError
from .mesh_io import EmbeddedMesh, undirected_edges

__all__ = [
    "WeightScheme",
    "CellComplex",
    "WeightedSurfaceGraph",
    "circumcenter",
    "rho_extrinsic",
    "rho_intrinsic",
    "build_structure",
    "edge_weights",
    "min_angle",
    "build_structure_from_cells",
    "DELAUNAY_TOL",
]

DELAUNAY_TOL = 1e-10


class WeightScheme(str, Enum):
    INTRINSIC = "intrinsic"
    EXTRINSIC = "extrinsic"
    UNIT = "unit"


@dataclass(frozen=True)
class CellComplex:
    """Abstract cellular surface.

    ``edges[e] = (tail, head)`` and each face is a cyclic tuple of darts
    ``(edge, sign)``. Loops and multiple edges are allowed, so surfaces with
    a single vertex can be described.
    """

    n_vertices: int
    edges: tuple
    faces: tuple

    @classmethod
    def from_polygons(cls, polygons, n_vertices=None):
        """Build from vertex cycles; edges are identified by their vertex pair.

        Only valid when no two distinct edges share both endpoints.
        """
        index, edges, faces = {}, [], []
        for poly in polygons:
            darts = []
            for k in range(len(poly)):
                a, b = int(poly[k]), int(poly[(k + 1) % len(poly)])
                key = (min(a, b), max(a, b))
                if key not in index:
                    index[key] = len(edges)
                    edges.append((a, b))
                e = index[key]
                darts.append((e, 1 if edges[e] == (a, b) else -1))
            faces.append(tuple(darts))
        if n_vertices is None:
            n_vertices = 1 + max(max(p) for p in polygons)
        return cls(int(n_vertices), tuple(edges), tuple(faces))


@dataclass(frozen=True, eq=False)
class WeightedSurfaceGraph:
    """Primal graph with weights and the derived dual / double / quad graphs.

    Build instances through :func:`build_structure` or
    :func:`build_structure_from_cells`, which validate the input.
    """

    n_vertices: int
    edge_tail: np.ndarray
    edge_head: np.ndarray
    faces: tuple  # tuple of tuples of (edge, sign)
    rho: np.ndarray
    scheme: str = "unit"
    info: dict = field(default_factory=dict)

    # -- sizes ---------------------------------------------------------------
    @property
    def n_edges(self):
        return len(self.edge_tail)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_lambda_vertices(self):
        return self.n_vertices + self.n_faces

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self):
        return (2 - self.euler_characteristic) // 2

    @property
    def rho_dual(self):
        return 1.0 / self.rho

    @cached_property
    def rho_lambda(self):
        """Weights on all double-graph edges: primal block then dual block."""
        return np.concatenate([self.rho, 1.0 / self.rho])

    # -- incidence -----------------------------------------------------------
    @cached_property
    def face_offsets(self):
        sizes = np.array([len(f) for f in self.faces], dtype=np.int64)
        return np.concatenate([[0], np.cumsum(sizes)])

    @cached_property
    def _sides(self):
        E = self.n_edges
        left_face = np.full(E, -1, dtype=np.int64)
        left_pos = np.full(E, -1, dtype=np.int64)
        right_face = np.full(E, -1, dtype=np.int64)
        right_pos = np.full(E, -1, dtype=np.int64)
        for f, darts in enumerate(self.faces):
            for i, (e, s) in enumerate(darts):
                if s > 0:
                    left_face[e], left_pos[e] = f, i
                else:
                    right_face[e], right_pos[e] = f, i
        return left_face, left_pos, right_face, right_pos

    @property
    def left_face(self):
        return self._sides[0]

    @property
    def left_pos(self):
        return self._sides[1]

    @property
    def right_face(self):
        return self._sides[2]

    @property
    def right_pos(self):
        return self._sides[3]

    @property
    def dual_tail(self):
        """Dual edge ``e*`` starts at the right face of ``e``."""
        return self.right_face

    @property
    def dual_head(self):
        return self.left_face

    def dart_tail(self, e, s):
        return int(self.edge_tail[e] if s > 0 else self.edge_head[e])

    def dart_head(self, e, s):
        return int(self.edge_head[e] if s > 0 else self.edge_tail[e])

    @cached_property
    def face_vertices(self):
        return tuple(tuple(self.dart_tail(e, s) for e, s in f) for f in self.faces)

    # -- corners: the edges of the quad-graph --------------------------------
    @cached_property
    def corner_vertex(self):
        """Primal vertex of every corner; corner ``offset[f] + i`` is position i of face f."""
        return np.array([v for fv in self.face_vertices for v in fv], dtype=np.int64)

    @cached_property
    def corner_face(self):
        return np.repeat(np.arange(self.n_faces), np.diff(self.face_offsets))

    def corner(self, f, i):
        n = len(self.faces[f])
        return int(self.face_offsets[f] + (i % n))

    def corner_pos(self, c):
        f = int(self.corner_face[c])
        return f, int(c - self.face_offsets[f])

    @cached_property
    def quad_corners(self):
        """Four quad-graph edges bounding the quad of each primal edge.

        Columns: (tail, left), (head, left), (head, right), (tail, right).
        """
        lf, lp, rf, rp = self._sides
        q = np.empty((self.n_edges, 4), dtype=np.int64)
        for e in range(self.n_edges):
            q[e] = (
                self.corner(lf[e], lp[e]),
                self.corner(lf[e], lp[e] + 1),
                self.corner(rf[e], rp[e]),
                self.corner(rf[e], rp[e] + 1),
            )
        return q

    def rotate_ccw(self, c):
        """Next corner counterclockwise around the vertex of corner ``c``.

        Returns ``(next_corner, dual_dart)`` where ``dual_dart = (e, sign)``
        is the dual edge crossed by the step.
        """
        f, i = self.corner_pos(c)
        e, s = self.faces[f][i - 1]  # dart entering the vertex inside face f
        if s > 0:
            g, j = self.right_face[e], self.right_pos[e]
        else:
            g, j = self.left_face[e], self.left_pos[e]
        return self.corner(g, j), (int(e), -int(s))

    @cached_property
    def vertex_rotation(self):
        """Counterclockwise list of corners around every primal vertex."""
        rot = [None] * self.n_vertices
        for c0 in range(len(self.corner_vertex)):
            v = int(self.corner_vertex[c0])
            if rot[v] is not None:
                continue
            cyc, c = [], c0
            while True:
                cyc.append(c)
                c, _ = self.rotate_ccw(c)
                if c == c0:
                    break
            rot[v] = tuple(cyc)
        return tuple(rot)

    @cached_property
    def rotation_index(self):
        idx = np.empty(len(self.corner_vertex), dtype=np.int64)
        for cyc in self.vertex_rotation:
            for k, c in enumerate(cyc):
                idx[c] = k
        return idx

    # -- sparse operators ----------------------------------------------------
    @cached_property
    def d0_primal(self):
        """(E, V) coboundary on the primal graph: f(head) - f(tail)."""
        E, V = self.n_edges, self.n_vertices
        rows = np.concatenate([np.arange(E), np.arange(E)])
        cols = np.concatenate([self.edge_head, self.edge_tail])
        vals = np.concatenate([np.ones(E), -np.ones(E)])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(E, V))

    @cached_property
    def d0_dual(self):
        """(E, F) coboundary on the dual graph: g(left) - g(right)."""
        E, F = self.n_edges, self.n_faces
        rows = np.concatenate([np.arange(E), np.arange(E)])
        cols = np.concatenate([self.left_face, self.right_face])
        vals = np.concatenate([np.ones(E), -np.ones(E)])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(E, F))

    @cached_property
    def d0_lambda(self):
        return sparse.block_diag([self.d0_primal, self.d0_dual], format="csr")

    @property
    def face_boundary_primal(self):
        """(F, E) oriented boundary of primal faces; equals ``d0_dual.T``."""
        return self.d0_dual.T.tocsr()

    @property
    def face_boundary_dual(self):
        """(V, E) oriented boundary of dual faces (counterclockwise around vertices)."""
        return (-self.d0_primal.T).tocsr()

    @cached_property
    def laplacian_primal(self):
        return (self.d0_primal.T @ sparse.diags(self.rho) @ self.d0_primal).tocsr()

    @cached_property
    def laplacian_dual(self):
        return (self.d0_dual.T @ sparse.diags(1.0 / self.rho) @ self.d0_dual).tocsr()

    # -- misc ----------------------------------------------------------------
    def with_rho(self, rho, scheme=None):
        rho = np.asarray(rho, dtype=float)
        _check_weights(rho)
        rho = rho.copy()
        rho.setflags(write=False)
        return WeightedSurfaceGraph(
            self.n_vertices, self.edge_tail, self.edge_head, self.faces, rho,
            scheme or self.scheme, dict(self.info),
        )

    def cell_complex(self):
        edges = tuple(zip(self.edge_tail.tolist(), self.edge_head.tolist()))
        return CellComplex(self.n_vertices, edges, self.faces)

    def quad_graph_counts(self):
        """(vertices, edges, faces) of the quad-graph."""
        return self.n_vertices + self.n_faces, 2 * self.n_edges, self.n_edges

    def diagnostics(self):
        d = {
            "vertices": self.n_vertices,
            "edges": self.n_edges,
            "faces": self.n_faces,
            "genus": self.genus,
            "min_rho": float(self.rho.min()),
            "max_rho": float(self.rho.max()),
        }
        d.update(self.info)
        return d


# ---------------------------------------------------------------------------
# geometry


def circumcenter(a, b, c):
    """Circumcenter of a triangle in R^3 (or R^2).

    Raises ``ValueError`` for collinear vertices.
    """
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    if a.shape[-1] == 2:
        a, b, c = (np.append(p, 0.0) for p in (a, b, c))
        return circumcenter(a, b, c)[:2]
    u, v = b - a, c - a
    w = np.cross(u, v)
    ww = w @ w
    if not ww > 1e-28 * (u @ u) * (v @ v):
        raise ValueError("collinear triangle has no circumcenter")
    return a + ((u @ u) * np.cross(v, w) + (v @ v) * np.cross(w, u)) / (2.0 * ww)


def _circumcenters(a, b, c):
    """Row-wise circumcenters of triangles given as (k, 3) arrays."""
    u, v = b - a, c - a
    w = np.cross(u, v)
    ww = np.einsum("ij,ij->i", w, w)
    uu = np.einsum("ij,ij->i", u, u)[:, None]
    vv = np.einsum("ij,ij->i", v, v)[:, None]
    return a + (uu * np.cross(v, w) + vv * np.cross(w, u)) / (2.0 * ww[:, None])


def _cot(p, q, r):
    """Cotangent of the angle at ``p`` in triangle (p, q, r)."""
    u, v = q - p, r - p
    return float(u @ v) / float(np.linalg.norm(np.cross(u, v)))


def _edge_context(mesh, a, b):
    """Apexes opposite edge {a, b}: (apex of face with a->b, apex of face with b->a)."""
    left = right = None
    for tri in mesh.faces:
        t = [int(x) for x in tri]
        for k in range(3):
            if t[k] == a and t[(k + 1) % 3] == b:
                left = t[(k + 2) % 3]
            elif t[k] == b and t[(k + 1) % 3] == a:
                right = t[(k + 2) % 3]
    if left is None or right is None:
        raise ValueError(f"{a}-{b} is not an edge of the mesh")
    return left, right


def _rho_in(x, xp, yl, yr):
    return 0.5 * (_cot(yl, x, xp) + _cot(yr, x, xp))


def _rho_ex(x, xp, yl, yr):
    cl = circumcenter(x, xp, yl)
    cr = circumcenter(xp, x, yr)
    dist = float(np.linalg.norm(cl - cr)) / float(np.linalg.norm(xp - x))
    # sign from the intrinsic test: non-Delaunay edges must not slip through
    return math.copysign(dist, _rho_in(x, xp, yl, yr))


def rho_intrinsic(mesh: EmbeddedMesh, edge):
    """Intrinsic weight of edge ``(a, b)``: half the sum of the opposite cotangents.

    Raises :class:`DelaunayViolation` when the value is at most ``DELAUNAY_TOL``.
    """
    a, b = (int(x) for x in edge)
    yl, yr = _edge_context(mesh, a, b)
    p = mesh.vertices
    r = _rho_in(p[a], p[b], p[yl], p[yr])
    if r <= DELAUNAY_TOL:
        raise DelaunayViolation([(None, a, b, r)], "intrinsic")
    return r


def rho_extrinsic(mesh: EmbeddedMesh, edge):
    """Chordal distance of the two 3D circumcenters divided by the edge length."""
    a, b = (int(x) for x in edge)
    yl, yr = _edge_context(mesh, a, b)
    p = mesh.vertices
    r = _rho_ex(p[a], p[b], p[yl], p[yr])
    if r <= DELAUNAY_TOL:
        raise DelaunayViolation([(None, a, b, r)], "extrinsic")
    return r


def _mesh_weights(mesh, edges, scheme):
    p = mesh.vertices
    E = len(edges)
    apex_left = np.full(E, -1, dtype=np.int64)
    apex_right = np.full(E, -1, dtype=np.int64)
    index = {(int(a), int(b)): e for e, (a, b) in enumerate(edges)}
    for tri in mesh.faces:
        t = [int(x) for x in tri]
        for k in range(3):
            a, b, c = t[k], t[(k + 1) % 3], t[(k + 2) % 3]
            if (a, b) in index:
                apex_left[index[(a, b)]] = c
            else:
                apex_right[index[(b, a)]] = c
    x, xp = p[edges[:, 0]], p[edges[:, 1]]
    yl, yr = p[apex_left], p[apex_right]

    def cot(apex, q, r):
        u, v = q - apex, r - apex
        return np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)

    rho_in = 0.5 * (cot(yl, x, xp) + cot(yr, x, xp))
    if scheme == WeightScheme.INTRINSIC:
        return rho_in
    dist = np.linalg.norm(_circumcenters(x, xp, yl) - _circumcenters(xp, x, yr), axis=1)
    return np.copysign(dist / np.linalg.norm(xp - x, axis=1), rho_in)


def _min_angles(mesh):
    p = mesh.vertices[mesh.faces]
    worst = np.pi
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", u, v) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        )
        worst = min(worst, float(np.arccos(np.clip(cosang, -1, 1)).min()))
    return math.degrees(worst)


def edge_weights(mesh: EmbeddedMesh, scheme="intrinsic"):
    """Per-edge weights without the Delaunay check, with the edge array.

    Non-positive entries mark non-Delaunay edges. Used for validation
    reports.
    """
    scheme = WeightScheme(scheme)
    edges, _ = undirected_edges(mesh.faces)
    if scheme == WeightScheme.UNIT:
        return np.ones(len(edges)), edges
    return _mesh_weights(mesh, edges, scheme), edges


def min_angle(mesh: EmbeddedMesh):
    """Smallest triangle angle in degrees."""
    return _min_angles(mesh)


def build_structure(mesh: EmbeddedMesh, scheme="intrinsic") -> WeightedSurfaceGraph:
    """Discrete conformal structure of a triangle mesh.

    Every edge must be strictly Delaunay under the chosen scheme; otherwise a
    single :class:`DelaunayViolation` listing all offending edges is raised.
    """
    scheme = WeightScheme(scheme)
    edges, _ = undirected_edges(mesh.faces)
    if scheme == WeightScheme.UNIT:
        rho = np.ones(len(edges))
    else:
        rho = _mesh_weights(mesh, edges, scheme)
        bad = np.flatnonzero(~(rho > DELAUNAY_TOL))
        if len(bad):
            raise DelaunayViolation(
                [(int(e), int(edges[e, 0]), int(edges[e, 1]), float(rho[e])) for e in bad],
                scheme.value,
            )
    cells = CellComplex.from_polygons(mesh.faces.tolist(), mesh.n_vertices)
    g = build_structure_from_cells(cells, rho, scheme=scheme.value)
    g.info.update(
        {"min_angle_deg": _min_angles(mesh), "source": mesh.name or "mesh"}
    )
    return g


def _check_weights(rho):
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        bad = np.flatnonzero(~(rho > 0))
        raise ValueError(f"weights must be positive; offending edges {bad[:10].tolist()}")


def build_structure_from_cells(cells: CellComplex, rho, scheme="unit") -> WeightedSurfaceGraph:
    """Weighted structure over an abstract closed oriented cellular surface.

    ``rho`` is a scalar or one positive value per edge.

    Raises
    ------
    TopologyError
        If an edge is not used exactly once in each direction, if consecutive
        darts of a face do not chain, or if the surface is disconnected.
    ValueError
        If a weight is not positive.
    """
    E = len(cells.edges)
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (E,)).copy()
    _check_weights(rho)
    tail = np.array([t for t, _ in cells.edges], dtype=np.int64).reshape(E)
    head = np.array([h for _, h in cells.edges], dtype=np.int64).reshape(E)
    if E and (tail.min() < 0 or head.min() < 0 or max(tail.max(), head.max()) >= cells.n_vertices):
        raise TopologyError("edge references a missing vertex")

    uses = np.zeros((E, 2), dtype=np.int64)
    faces = []
    for f, darts in enumerate(cells.faces):
        darts = tuple((int(e), 1 if s > 0 else -1) for e, s in darts)
        if not darts:
            raise TopologyError(f"face {f} is empty")
        for i, (e, s) in enumerate(darts):
            if not 0 <= e < E:
                raise TopologyError(f"face {f} references missing edge {e}")
            uses[e, 0 if s > 0 else 1] += 1
            en, sn = darts[(i + 1) % len(darts)]
            h = head[e] if s > 0 else tail[e]
            t = tail[en] if sn > 0 else head[en]
            if h != t:
                raise TopologyError(f"face {f}: darts {i} and {i + 1} do not chain")
        faces.append(darts)
    bad = np.flatnonzero((uses[:, 0] != 1) | (uses[:, 1] != 1))
    if len(bad):
        e = int(bad[0])
        if uses[e].sum() != 2:
            raise TopologyError(f"non-manifold edge {e}: used by {uses[e].sum()} face sides")
        raise TopologyError(f"inconsistent orientation at edge {e}")

    touched = np.zeros(cells.n_vertices, dtype=bool)
    touched[tail] = True
    touched[head] = True
    if not touched.all():
        raise TopologyError("isolated vertex")

    rho.setflags(write=False)
    tail.setflags(write=False)
    head.setflags(write=False)
    g = WeightedSurfaceGraph(cells.n_vertices, tail, head, tuple(faces), rho, str(scheme), {})
    # connectivity of the surface = connectivity of the primal graph
    n_comp = csgraph.connected_components(
        sparse.coo_matrix((np.ones(E), (tail, head)), shape=(g.n_vertices,) * 2),
        directed=False,
    )[0]
    if n_comp != 1:
        raise TopologyError("surface is disconnected")
    # vertex links must be single disks (manifold at vertices)
    corners_seen = sum(len(c) for c in g.vertex_rotation if c is not None)
    if any(c is None for c in g.vertex_rotation) or corners_seen != len(g.corner_vertex):
        raise TopologyError("non-manifold vertex")
    if g.euler_characteristic % 2:
        raise TopologyError("odd Euler characteristic")
    return g
