"""Homology bases of closed surfaces from the quad-graph.

The quad-graph has one vertex per primal vertex and per primal face, one
edge per *corner* (a vertex/face incidence) and one quadrilateral per primal
edge. A basis of 2g rooted loops is found by growing a breadth-first
spanning tree, inflating it face by face into a fundamental domain and
picking the leftover edges closest to the root. Each loop is then projected
onto the primal and the dual graph and the basis is brought to symplectic
form with integer row operations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .conformal import WeightedSurfaceGraph
from .errors import TopologyError

__all__ = [
    "Cycle",
    "HomologyBasis",
    "SpanningTree",
    "spanning_tree",
    "quad_adjacency",
    "homotopy_basis",
    "graph_representatives",
    "intersection_number",
    "intersection_matrix",
    "symplectic_reduction",
    "symplectic_normalize",
    "canonical_basis",
    "face_boundary_cycle",
]


@dataclass(frozen=True)
class Cycle:
    """Closed path given as darts on one host graph.

    ``host="primal"`` or ``"dual"``: darts are ``(edge, sign)`` along the
    primal edge or its dual. ``host="quad"``: darts are ``(corner, sign)``
    with ``sign=+1`` walking from the primal vertex to the face.
    """

    darts: tuple
    host: str

    def reversed(self):
        return Cycle(tuple((c, -s) for c, s in reversed(self.darts)), self.host)

    def __add__(self, other):
        if other.host != self.host:
            raise ValueError("cannot concatenate cycles on different graphs")
        return Cycle(self.darts + other.darts, self.host)

    def __len__(self):
        return len(self.darts)

    def repeated(self, k):
        """``k``-fold traversal; negative ``k`` runs backwards."""
        base = self if k >= 0 else self.reversed()
        return Cycle(base.darts * abs(k), self.host)

    def chain(self, n):
        """Signed traversal count of every edge (length-``n`` integer vector)."""
        vec = np.zeros(n, dtype=np.int64)
        if self.darts:
            idx, sgn = zip(*self.darts)
            np.add.at(vec, list(idx), list(sgn))
        return vec

    def vertices(self, graph: WeightedSurfaceGraph):
        """Vertex sequence of the path (quad-graph vertices use ``V + face``)."""
        if not self.darts:
            return []
        V = graph.n_vertices
        out = []
        for c, s in self.darts:
            if self.host == "quad":
                v, f = int(graph.corner_vertex[c]), V + int(graph.corner_face[c])
                out.append(v if s > 0 else f)
            elif self.host == "primal":
                out.append(graph.dart_tail(c, s))
            else:
                a, b = int(graph.dual_tail[c]), int(graph.dual_head[c])
                out.append(a if s > 0 else b)
        return out


@dataclass(frozen=True, eq=False)
class HomologyBasis:
    cycles: tuple  # quad-graph Cycles, all rooted at ``root``
    gamma_reps: tuple
    dual_reps: tuple
    intersection: np.ndarray  # [i, j] = gamma_reps[i] ∘ dual_reps[j]
    root: int
    normalized: bool = False

    @property
    def genus(self):
        return len(self.cycles) // 2

    def __len__(self):
        return len(self.cycles)

    def a_indices(self):
        return list(range(self.genus))

    def b_indices(self):
        return list(range(self.genus, 2 * self.genus))

    def to_dict(self, graph=None):
        d = {
            "root": self.root,
            "normalized": self.normalized,
            "intersection": self.intersection.tolist(),
            "cycle_lengths": [len(c) for c in self.cycles],
        }
        if graph is not None:
            d["primal_cycles"] = [r.vertices(graph) for r in self.gamma_reps]
        return d


@dataclass(frozen=True, eq=False)
class SpanningTree:
    root: int
    parent: np.ndarray  # -1 at the root
    parent_edge: np.ndarray
    depth: np.ndarray
    order: np.ndarray  # BFS visiting order

    def path_to_root(self, v):
        """Vertices and edges from ``v`` up to the root."""
        verts, edges = [v], []
        while self.parent[v] >= 0:
            edges.append(int(self.parent_edge[v]))
            v = int(self.parent[v])
            verts.append(v)
        return verts, edges

    def edges(self):
        return {int(e) for e in self.parent_edge if e >= 0}


def spanning_tree(adjacency, root=0) -> SpanningTree:
    """Breadth-first spanning tree.

    ``adjacency[v]`` lists ``(neighbour, edge_id)`` pairs; neighbours are
    visited in the listed order, so every vertex at distance ``d`` hangs off
    the first-discovered vertex at distance ``d - 1``.
    """
    n = len(adjacency)
    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, e in adjacency[v]:
            if depth[w] < 0:
                depth[w] = depth[v] + 1
                parent[w], parent_edge[w] = v, e
                order.append(w)
                queue.append(w)
    if len(order) != n:
        raise TopologyError(f"graph is disconnected: reached {len(order)} of {n} vertices")
    return SpanningTree(root, parent, parent_edge, depth, np.array(order))


def quad_adjacency(graph: WeightedSurfaceGraph):
    """Adjacency lists of the quad-graph; edge ids are corner ids."""
    V = graph.n_vertices
    adj = [None] * (V + graph.n_faces)
    for v, rot in enumerate(graph.vertex_rotation):
        adj[v] = [(V + int(graph.corner_face[c]), c) for c in rot]
    for f in range(graph.n_faces):
        off = int(graph.face_offsets[f])
        adj[V + f] = [
            (int(graph.corner_vertex[off + i]), off + i) for i in range(len(graph.faces[f]))
        ]
    return adj


def _corner_quads(graph, c):
    f, i = graph.corner_pos(c)
    darts = graph.faces[f]
    return int(darts[i - 1][0]), int(darts[i][0])


def _non_bridges(nodes, edges):
    """Edge ids of a multigraph that lie on some cycle (iterative Tarjan).

    ``edges`` maps edge id -> (u, v); self-loops and parallel edges count.
    """
    adj = {u: [] for u in nodes}
    for eid, (u, v) in edges.items():
        adj[u].append((v, eid))
        adj[v].append((u, eid))
    disc, low = {}, {}
    bridges = set()
    timer = 0
    for start in nodes:
        if start in disc:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack = [(start, None, iter(adj[start]))]
        while stack:
            u, via, it = stack[-1]
            advanced = False
            for w, eid in it:
                if eid == via:
                    continue
                if w in disc:
                    low[u] = min(low[u], disc[w])
                else:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eid, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] > disc[p]:
                        bridges.add(via)
    return set(edges) - bridges


def _tree_path(tree, graph, node, towards_root):
    """Quad-graph darts from ``node`` to the root (or the reverse)."""
    V = graph.n_vertices
    verts, edges = tree.path_to_root(node)
    darts = []
    for k, c in enumerate(edges):
        # stepping verts[k] -> verts[k+1]; +1 when leaving a primal vertex
        darts.append((c, 1 if verts[k] < V else -1))
    if towards_root:
        return darts
    return [(c, -s) for c, s in reversed(darts)]


def homotopy_basis(graph: WeightedSurfaceGraph, root=0, normalize=True) -> HomologyBasis:
    """Rooted homology basis of the quad-graph with primal/dual representatives.

    ``root`` is a primal vertex. Genus 0 yields an empty basis. With
    ``normalize=True`` the result is passed through :func:`symplectic_normalize`.
    """
    V = graph.n_vertices
    if not 0 <= root < V:
        raise ValueError(f"root {root} is not a primal vertex")
    g = graph.genus
    adj = quad_adjacency(graph)
    tree = spanning_tree(adj, root)

    n_corners = len(graph.corner_vertex)
    in_domain = np.zeros(n_corners, dtype=bool)
    in_domain[list(tree.edges())] = True
    quads = graph.quad_corners
    missing = np.array([int((~in_domain[q]).sum()) for q in quads])
    closed = np.zeros(graph.n_edges, dtype=bool)
    corner_quads = [_corner_quads(graph, c) for c in range(n_corners)]

    queue = deque(int(q) for q in np.flatnonzero(missing <= 1))

    def add_corner(c):
        in_domain[c] = True
        for q in corner_quads[c]:
            missing[q] -= int(np.count_nonzero(quads[q] == c))
            if not closed[q] and missing[q] <= 1:
                queue.append(q)

    def inflate():
        while queue:
            q = queue.popleft()
            if closed[q] or missing[q] > 1:
                continue
            closed[q] = True
            if missing[q] == 1:
                add_corner(int(quads[q][~in_domain[quads[q]]][0]))

    def corner_distance(c):
        return int(tree.depth[graph.corner_vertex[c]] + tree.depth[V + graph.corner_face[c]])

    generators = []
    inflate()
    while not closed.all():
        open_quads = [int(q) for q in np.flatnonzero(~closed)]
        free = {
            c: corner_quads[c] for c in range(n_corners) if not in_domain[c]
        }
        candidates = _non_bridges(open_quads, free)
        if not candidates:
            raise TopologyError("fundamental domain inflation stalled")
        c = min(candidates, key=lambda c: (corner_distance(c), c))
        generators.append(c)
        add_corner(c)
        inflate()
    if len(generators) != 2 * g:
        raise TopologyError(f"found {len(generators)} generators, expected {2 * g}")

    cycles = []
    for c in generators:
        v, f = int(graph.corner_vertex[c]), V + int(graph.corner_face[c])
        darts = _tree_path(tree, graph, v, towards_root=False) + [(c, 1)]
        darts += _tree_path(tree, graph, f, towards_root=True)
        cycles.append(Cycle(tuple(darts), "quad"))
    basis = _with_representatives(graph, cycles, root, normalized=False)
    if g == 0 or not normalize:
        return basis
    return symplectic_normalize(graph, basis)


def _face_walk(graph, f, a, b):
    """Primal darts along face ``f`` from corner position ``a`` to ``b``."""
    darts = graph.faces[f]
    n = len(darts)
    fwd = (b - a) % n
    if fwd == 0:
        return []
    back = n - fwd
    if fwd < back or (fwd == back and a < b):
        return [darts[(a + k) % n] for k in range(fwd)]
    return [(darts[(a - 1 - k) % n][0], -darts[(a - 1 - k) % n][1]) for k in range(back)]


def _vertex_walk(graph, c_in, c_out):
    """Dual darts around a primal vertex from corner ``c_in`` to ``c_out``."""
    rot = graph.vertex_rotation[int(graph.corner_vertex[c_in])]
    n = len(rot)
    ia, ib = int(graph.rotation_index[c_in]), int(graph.rotation_index[c_out])
    fwd = (ib - ia) % n
    if fwd == 0:
        return []
    back = n - fwd
    out = []
    if fwd < back or (fwd == back and ia < ib):
        c = c_in
        for _ in range(fwd):
            c, dart = graph.rotate_ccw(c)
            out.append(dart)
    else:
        for k in range(back):
            prev = rot[(ia - 1 - k) % n]
            _, (e, s) = graph.rotate_ccw(prev)
            out.append((e, -s))
    return out


def graph_representatives(graph: WeightedSurfaceGraph, cycle: Cycle):
    """Project a closed quad-graph path to homologous primal and dual cycles.

    Consecutive primal vertices of the path share a face and are joined along
    its boundary; consecutive faces share a vertex and are joined around it.
    The shorter way round is used.
    """
    if cycle.host != "quad":
        raise ValueError("expected a quad-graph cycle")
    darts = cycle.darts
    n = len(darts)
    primal, dual = [], []
    for k in range(n):
        c_in, s_in = darts[k]
        c_out, s_out = darts[(k + 1) % n]
        if s_in > 0:
            if s_out > 0:
                raise ValueError("quad-graph path is not alternating")
            f, a = graph.corner_pos(c_in)
            f2, b = graph.corner_pos(c_out)
            primal.extend(_face_walk(graph, f, a, b))
        else:
            if s_out < 0:
                raise ValueError("quad-graph path is not alternating")
            dual.extend(_vertex_walk(graph, c_in, c_out))
    return Cycle(tuple(primal), "primal"), Cycle(tuple(dual), "dual")


def intersection_number(primal_cycle: Cycle, dual_cycle: Cycle, n_edges=None) -> int:
    """Algebraic intersection of a primal cycle with a dual cycle.

    Each quad where the primal cycle runs along ``e`` and the dual cycle
    along ``e*`` contributes the product of the traversal signs. Swapping
    the roles (dual first) flips the sign.
    """
    if primal_cycle.host == "dual" and dual_cycle.host == "primal":
        return -intersection_number(dual_cycle, primal_cycle, n_edges)
    if primal_cycle.host != "primal" or dual_cycle.host != "dual":
        raise ValueError("need one primal and one dual cycle")
    if n_edges is None:
        n_edges = 1 + max([c for c, _ in primal_cycle.darts + dual_cycle.darts], default=0)
    return int(primal_cycle.chain(n_edges) @ dual_cycle.chain(n_edges))


def intersection_matrix(graph, gamma_reps, dual_reps):
    E = graph.n_edges
    P = np.array([c.chain(E) for c in gamma_reps], dtype=np.int64).reshape(-1, E)
    D = np.array([c.chain(E) for c in dual_reps], dtype=np.int64).reshape(-1, E)
    return P @ D.T


def _with_representatives(graph, cycles, root, normalized):
    reps = [graph_representatives(graph, c) for c in cycles]
    gamma = tuple(r[0] for r in reps)
    dual = tuple(r[1] for r in reps)
    M = intersection_matrix(graph, gamma, dual)
    return HomologyBasis(tuple(cycles), gamma, dual, M, root, normalized)


def symplectic_reduction(M):
    """Integer matrix ``S`` with ``S M Sᵀ = J`` for antisymmetric unimodular ``M``.

    ``J = [[0, I], [-I, 0]]``. Uses symplectic Gram-Schmidt with Euclidean
    reduction of the pairing values. Raises ``ValueError`` when ``M`` is
    degenerate over the integers.
    """
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if n % 2:
        raise ValueError("odd dimension")
    if (M + M.T).any():
        raise ValueError("pairing is not antisymmetric")

    def form(u, v):
        return int(u @ M @ v)

    remaining = [np.array([int(i == j) for j in range(n)], dtype=object) for i in range(n)]
    a_vecs, b_vecs = [], []
    while remaining:
        u = remaining.pop(0)
        while True:
            vals = [form(u, w) for w in remaining]
            nz = [j for j, x in enumerate(vals) if x != 0]
            if not nz:
                raise ValueError("intersection pairing is degenerate")
            k = min(nz, key=lambda j: (abs(vals[j]), j))
            if abs(vals[k]) == 1:
                break
            p = vals[k]
            for j in nz:
                if j != k:
                    remaining[j] = remaining[j] - (vals[j] // p) * remaining[k]
            if all(form(u, w) == 0 for j, w in enumerate(remaining) if j != k):
                raise ValueError("intersection pairing is not unimodular")
        v = remaining.pop(k)
        if vals[k] < 0:
            v = -v
        new = []
        for w in remaining:
            w = w + form(v, w) * u - form(u, w) * v
            new.append(w)
        remaining = new
        a_vecs.append(u)
        b_vecs.append(v)
    S = np.array(a_vecs + b_vecs, dtype=object)
    return np.array(S.tolist(), dtype=np.int64)


def canonical_form(g):
    J = np.zeros((2 * g, 2 * g), dtype=np.int64)
    J[:g, g:] = np.eye(g, dtype=np.int64)
    J[g:, :g] = -np.eye(g, dtype=np.int64)
    return J


def symplectic_normalize(graph: WeightedSurfaceGraph, basis: HomologyBasis) -> HomologyBasis:
    """Recombine the basis loops so the intersection matrix becomes ``J``.

    New loops are concatenations of the old rooted loops and their reverses;
    representatives are recomputed from them.
    """
    n = len(basis.cycles)
    if n == 0:
        return HomologyBasis((), (), (), np.zeros((0, 0), np.int64), basis.root, True)
    M = basis.intersection
    if round(abs(np.linalg.det(M.astype(float)))) != 1:
        raise ValueError(f"intersection matrix is not unimodular: det={np.linalg.det(M):.3g}")
    S = symplectic_reduction(M)
    cycles = []
    for row in S:
        darts = ()
        for k, coef in enumerate(row):
            if coef:
                darts += basis.cycles[k].repeated(int(coef)).darts
        cycles.append(Cycle(darts, "quad"))
    out = _with_representatives(graph, cycles, basis.root, normalized=True)
    J = canonical_form(n // 2)
    if not np.array_equal(out.intersection, J):
        raise ValueError("symplectic normalization failed")
    return out


def canonical_basis(graph: WeightedSurfaceGraph, root=0) -> HomologyBasis:
    return homotopy_basis(graph, root, normalize=True)


def face_boundary_cycle(graph: WeightedSurfaceGraph, face):
    """Boundary of a primal face as a primal cycle."""
    return Cycle(tuple(graph.faces[face]), "primal")
