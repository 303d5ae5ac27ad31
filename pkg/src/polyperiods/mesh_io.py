"""Loading, validating and measuring closed triangle meshes.

Only a small OBJ subset is understood: ``v x y z`` and ``f i j k`` records
with 1-based indices. Any other record type is skipped. Face entries of the
form ``i/t/n`` keep only the vertex index.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass
from typing import IO, Union

import numpy as np

from .errors import MeshError

__all__ = [
    "EmbeddedMesh",
    "TopologyReport",
    "load_mesh",
    "load_mesh_file",
    "dump_obj",
    "topology_report",
    "edge_lengths",
    "undirected_edges",
]


@dataclass(frozen=True, eq=False)
class EmbeddedMesh:
    """Closed, consistently oriented, connected triangle mesh in R^3.

    Use :func:`from_arrays` (or :func:`load_mesh`) to get a validated
    instance; the constructor itself does not check anything.
    """

    vertices: np.ndarray  # (V, 3) float
    faces: np.ndarray  # (F, 3) int, counterclockwise
    name: str | None = None

    @classmethod
    def from_arrays(cls, vertices, faces, name=None):
        v = np.array(vertices, dtype=float).reshape(-1, 3)
        f = np.array(faces, dtype=np.int64).reshape(-1, 3)
        v.setflags(write=False)
        f.setflags(write=False)
        mesh = cls(v, f, name)
        _validate(mesh)
        return mesh

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def transformed(self, rotation=None, translation=None, scale=1.0):
        """Return a copy with positions mapped by ``scale * R x + t``."""
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        v = scale * v
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return EmbeddedMesh.from_arrays(v, self.faces, self.name)


@dataclass(frozen=True)
class TopologyReport:
    vertex_count: int
    edge_count: int
    face_count: int
    euler_characteristic: int
    genus: int


def undirected_edges(faces):
    """Undirected edges in order of first appearance, oriented as first seen.

    Returns ``(edges, index)`` where ``edges`` is an ``(E, 2)`` array and
    ``index`` maps the sorted vertex pair to the edge number.
    """
    index = {}
    edges = []
    for tri in faces:
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            key = (a, b) if a < b else (b, a)
            if key not in index:
                index[key] = len(edges)
                edges.append((a, b))
    return np.array(edges, dtype=np.int64).reshape(-1, 2), index


def _validate(mesh, lines=None):
    v, f = mesh.vertices, mesh.faces
    nv = len(v)
    if nv == 0 or len(f) == 0:
        raise MeshError("mesh has no vertices or no faces")
    if not np.all(np.isfinite(v)):
        raise MeshError("non-finite vertex coordinate")

    def line_of(i):
        return None if lines is None else lines[i]

    directed = {}
    for i, tri in enumerate(f):
        a, b, c = (int(x) for x in tri)
        if min(a, b, c) < 0 or max(a, b, c) >= nv:
            raise MeshError(f"face {i} references a missing vertex", line_of(i))
        if a == b or b == c or a == c:
            raise MeshError(f"degenerate face {i}: repeated vertex", line_of(i))
        area2 = np.linalg.norm(np.cross(v[b] - v[a], v[c] - v[a]))
        scale = max(np.linalg.norm(v[b] - v[a]), np.linalg.norm(v[c] - v[a])) ** 2
        if not area2 > 1e-14 * scale:
            raise MeshError(f"degenerate face {i}: zero area", line_of(i))
        for x, y in ((a, b), (b, c), (c, a)):
            if (x, y) in directed:
                raise MeshError(
                    f"inconsistent orientation: directed edge {x + 1}->{y + 1} "
                    f"appears in faces {directed[(x, y)]} and {i}",
                    line_of(i),
                )
            directed[(x, y)] = i
    for (x, y), i in directed.items():
        if (y, x) not in directed:
            raise MeshError(
                f"non-manifold or boundary edge {x + 1}-{y + 1} "
                f"(incident faces != 2)",
                line_of(i),
            )

    used = np.zeros(nv, dtype=bool)
    used[f.ravel()] = True
    if not used.all():
        raise MeshError(f"disconnected mesh: {int((~used).sum())} isolated vertices")
    adjacency = [[] for _ in range(nv)]
    for x, y in directed:
        adjacency[x].append(y)
    seen = np.zeros(nv, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in adjacency[x]:
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    if not seen.all():
        raise MeshError("disconnected mesh")


def load_mesh(source: Union[IO, bytes, str], format="OBJ", name=None) -> EmbeddedMesh:
    """Parse an OBJ stream into a validated :class:`EmbeddedMesh`.

    Parameters
    ----------
    source : binary or text stream, bytes, or str
        The OBJ content.
    format : str
        Only ``"OBJ"`` is supported.

    Raises
    ------
    MeshError
        On a parse error (with line number), a non-triangular or degenerate
        face, a non-manifold edge, inconsistent orientation, or a
        disconnected mesh.
    """
    if format.upper() != "OBJ":
        raise ValueError(f"unsupported mesh format {format!r}")
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data

    vertices, faces, face_lines = [], [], []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "v":
            if len(rest) < 3:
                raise MeshError("vertex record needs 3 coordinates", lineno)
            try:
                vertices.append([float(x) for x in rest[:3]])
            except ValueError:
                raise MeshError(f"bad vertex coordinate in {line!r}", lineno) from None
        elif tag == "f":
            if len(rest) != 3:
                raise MeshError(f"non-triangular face with {len(rest)} vertices", lineno)
            idx = []
            for tok in rest:
                try:
                    k = int(tok.split("/", 1)[0])
                except ValueError:
                    raise MeshError(f"bad face index {tok!r}", lineno) from None
                if k < 0:
                    k = len(vertices) + 1 + k
                if k < 1:
                    raise MeshError(f"face index {tok} out of range", lineno)
                idx.append(k - 1)
            faces.append(idx)
            face_lines.append(lineno)

    v = np.array(vertices, dtype=float).reshape(-1, 3)
    f = np.array(faces, dtype=np.int64).reshape(-1, 3)
    v.setflags(write=False)
    f.setflags(write=False)
    mesh = EmbeddedMesh(v, f, name)
    _validate(mesh, face_lines)
    return mesh


def load_mesh_file(path, name=None):
    with open(path, "rb") as fh:
        return load_mesh(fh, name=name or str(path))


def dump_obj(mesh: EmbeddedMesh) -> str:
    """Serialize to OBJ text with 17 significant digits."""
    out = []
    if mesh.name:
        out.append(f"# {mesh.name}")
    for x, y, z in mesh.vertices:
        out.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.faces:
        out.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(out) + "\n"


def topology_report(mesh: EmbeddedMesh) -> TopologyReport:
    edges, _ = undirected_edges(mesh.faces)
    nv, ne, nf = mesh.n_vertices, len(edges), mesh.n_faces
    chi = nv - ne + nf
    return TopologyReport(nv, ne, nf, chi, (2 - chi) // 2)


def edge_lengths(mesh: EmbeddedMesh) -> dict[tuple[int, int], float]:
    """Euclidean length of every undirected edge, keyed by the sorted vertex pair.

    Raises :class:`MeshError` if two endpoints coincide.
    """
    edges, index = undirected_edges(mesh.faces)
    d = mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]]
    lengths = np.sqrt(np.einsum("ij,ij->i", d, d))
    bad = np.flatnonzero(~(lengths > 0))
    if len(bad):
        a, b = edges[bad[0]]
        raise MeshError(f"zero-length edge {a + 1}-{b + 1}")
    return {key: float(lengths[i]) for key, i in index.items()}
