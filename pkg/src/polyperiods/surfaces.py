"""Test surfaces with known moduli.

Square-tiled translation and half-translation surfaces are described by a
:class:`GluingSpec`: a number of unit squares and a pairing of their sides.
A north side glued to a south side (or east to west) is a translation; a
side glued to a side of the same name is a translation followed by a half
turn. Every square is refined into ``n x n`` cells with unit weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .conformal import CellComplex, WeightedSurfaceGraph, build_structure_from_cells

__all__ = [
    "GluingSpec",
    "ReferenceMatrix",
    "build_square_tiled",
    "flat_torus",
    "reference_matrices",
    "reference",
    "load_spec",
    "builtin_spec",
    "TAU_WENTE",
]

SIDES = ("S", "E", "N", "W")
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}


@dataclass(frozen=True)
class GluingSpec:
    """Square count and side identifications ``((sq, side), (sq, side), kind)``."""

    squares: int
    glue: tuple
    name: str | None = None

    def __post_init__(self):
        seen = set()
        for (s1, d1), (s2, d2), kind in self.glue:
            for s, d in ((s1, d1), (s2, d2)):
                if d not in SIDES:
                    raise ValueError(f"unknown side {d!r}")
                if not 0 <= s < self.squares:
                    raise ValueError(f"square {s} out of range")
                if (s, d) in seen:
                    raise ValueError(f"side {d} of square {s} glued twice")
                seen.add((s, d))
            horizontal = {d1, d2} <= {"N", "S"}
            vertical = {d1, d2} <= {"E", "W"}
            if not (horizontal or vertical):
                raise ValueError(f"gluing {d1}<->{d2} does not preserve directions")
            expected = "translation" if OPPOSITE[d1] == d2 else "half_turn"
            if kind != expected:
                raise ValueError(f"gluing {s1}{d1}<->{s2}{d2} is a {expected}, not {kind}")
        if len(seen) != 4 * self.squares:
            raise ValueError(f"{4 * self.squares - len(seen)} sides left unglued")

    @classmethod
    def from_dict(cls, data, name=None):
        glue = []
        for item in data["glue"]:
            (s1, d1), (s2, d2) = item["from"], item["to"]
            kind = item.get("kind") or ("translation" if OPPOSITE[d1] == d2 else "half_turn")
            glue.append(((int(s1), d1), (int(s2), d2), kind))
        return cls(int(data["squares"]), tuple(glue), name or data.get("name"))

    def to_dict(self):
        d = {
            "squares": self.squares,
            "glue": [
                {"from": [s1, d1], "to": [s2, d2], "kind": k}
                for (s1, d1), (s2, d2), k in self.glue
            ],
        }
        if self.name:
            d["name"] = self.name
        return d

    @property
    def is_translation(self):
        return all(k == "translation" for *_, k in self.glue)

    @classmethod
    def from_permutations(cls, right, up, name=None):
        """Origami given by the right and up neighbour permutations."""
        n = len(right)
        glue = [((i, "E"), (int(right[i]), "W"), "translation") for i in range(n)]
        glue += [((i, "N"), (int(up[i]), "S"), "translation") for i in range(n)]
        return cls(n, tuple(glue), name)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.flip = [0] * n  # orientation relative to parent

    def find(self, x):
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        # compress, accumulating orientation parities
        acc = 0
        for y in reversed(path):
            acc ^= self.flip[y]
            self.flip[y] = acc
            self.parent[y] = root
        return root

    def parity(self, x):
        self.find(x)
        return self.flip[x] if self.parent[x] != x else 0

    def union(self, a, b, rel=0):
        """Record ``a = b`` with relative orientation ``rel`` (0 same, 1 reversed)."""
        ra, rb = self.find(a), self.find(b)
        pa, pb = self.parity(a), self.parity(b)
        if ra == rb:
            if pa ^ pb != rel:
                raise ValueError("orientation-breaking gluing")
            return
        if rb < ra:
            ra, rb, pa, pb = rb, ra, pb, pa
        self.parent[rb] = ra
        self.flip[rb] = pa ^ pb ^ rel


def build_square_tiled(spec: GluingSpec, n=1) -> WeightedSurfaceGraph:
    """Cellular surface of the glued squares, each cut into ``n x n`` cells, ρ ≡ 1."""
    if n < 1:
        raise ValueError("refinement must be at least 1")
    N = spec.squares
    P = n + 1

    def point(s, i, j):
        return (s * P + j) * P + i

    # horizontal segment (s, i, j): (i, j) -> (i+1, j); vertical (s, i, j): (i, j) -> (i, j+1)
    def hseg(s, i, j):
        return (s * P + j) * n + i

    n_h = N * P * n

    def vseg(s, i, j):
        return n_h + (s * P + i) * n + j

    def side_point(s, d, t):
        """Point at counterclockwise parameter t on side d of square s."""
        return {
            "S": lambda: point(s, t, 0),
            "E": lambda: point(s, n, t),
            "N": lambda: point(s, n - t, n),
            "W": lambda: point(s, 0, n - t),
        }[d]()

    def side_segment(s, d, k):
        """(segment id, +1 if the counterclockwise walk matches its orientation)."""
        return {
            "S": lambda: (hseg(s, k, 0), 1),
            "E": lambda: (vseg(s, n, k), 1),
            "N": lambda: (hseg(s, n - k - 1, n), -1),
            "W": lambda: (vseg(s, 0, n - k - 1), -1),
        }[d]()

    pts = _UnionFind(N * P * P)
    segs = _UnionFind(2 * n_h)
    for (s1, d1), (s2, d2), _ in spec.glue:
        for t in range(P):
            pts.union(side_point(s1, d1, t), side_point(s2, d2, n - t))
        for k in range(n):
            a, sa = side_segment(s1, d1, k)
            b, sb = side_segment(s2, d2, n - 1 - k)
            # the two counterclockwise walks run in opposite directions
            pts_rel = 0 if sa * sb == -1 else 1
            segs.union(a, b, pts_rel)

    vid, eid = {}, {}
    edges, faces = [], []

    def vertex(p):
        r = pts.find(p)
        if r not in vid:
            vid[r] = len(vid)
        return vid[r]

    def dart(seg, tail_pt, head_pt, sign):
        r = segs.find(seg)
        par = segs.parity(seg)
        if r not in eid:
            eid[r] = len(edges)
            t, h = (tail_pt, head_pt) if par == 0 else (head_pt, tail_pt)
            edges.append((vertex(t), vertex(h)))
        return eid[r], sign * (-1 if par else 1)

    for s in range(N):
        for j in range(n):
            for i in range(n):
                p00, p10 = point(s, i, j), point(s, i + 1, j)
                p01, p11 = point(s, i, j + 1), point(s, i + 1, j + 1)
                faces.append((
                    dart(hseg(s, i, j), p00, p10, 1),
                    dart(vseg(s, i + 1, j), p10, p11, 1),
                    dart(hseg(s, i, j + 1), p01, p11, -1),
                    dart(vseg(s, i, j), p00, p01, -1),
                ))
    cells = CellComplex(len(vid), tuple(edges), tuple(faces))
    g = build_structure_from_cells(cells, 1.0, scheme="unit")
    g.info.update({"source": spec.name or "square-tiled", "squares": N, "refine": n})
    return g


def flat_torus(n, m, tau=1j) -> WeightedSurfaceGraph:
    """Flat torus tiled by ``n x m`` copies of the cell spanned by 1 and ``tau``.

    The lattice is generated by ``n`` and ``m * tau``. Rectangular cells are
    kept as quads with weight ``|Im tau| / 1`` on horizontal edges; other
    cells are cut along their shorter diagonal and weighted by cotangents.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("Im tau must be positive")
    if n < 1 or m < 1:
        raise ValueError("grid size must be positive")

    def v(i, j):
        return (j % m) * n + (i % n)

    if abs(tau.real) < 1e-15:
        polys = [[v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)] for j in range(m) for i in range(n)]
        cells = _cells_with_multiedges(polys, n, m)
        rho = np.array([tau.imag if kind == "h" else 1.0 / tau.imag for kind in cells[1]])
        g = build_structure_from_cells(cells[0], rho, scheme="intrinsic")
    else:
        short_main = abs(1 + tau) <= abs(tau - 1)
        tris, coords = [], []
        for j in range(m):
            for i in range(n):
                a, b, c, d = v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)
                za, zb, zc, zd = 0, 1, 1 + tau, tau
                if short_main:
                    tris += [(a, b, c), (a, c, d)]
                    coords += [(za, zb, zc), (za, zc, zd)]
                else:
                    tris += [(a, b, d), (b, c, d)]
                    coords += [(za, zb, zd), (zb, zc, zd)]
        cells, kinds = _cells_with_multiedges(tris, n, m, coords)
        rho = _cot_weights(cells, coords)
        g = build_structure_from_cells(cells, rho, scheme="intrinsic")
    g.info.update({"source": f"flat-torus:{n}x{m}", "tau": [tau.real, tau.imag]})
    return g


def _cells_with_multiedges(polys, n, m, coords=None):
    """Cell complex from vertex cycles on a torus grid.

    Small grids have distinct edges sharing both endpoints, so edges are keyed
    by their planar displacement as well.
    """
    index, edges, faces, kinds = {}, [], [], []
    for fi, poly in enumerate(polys):
        darts = []
        k = len(poly)
        for q in range(k):
            a, b = poly[q], poly[(q + 1) % k]
            if coords is None:
                disp = [(1, 0), (0, 1), (-1, 0), (0, -1)][q]
            else:
                z = coords[fi][(q + 1) % k] - coords[fi][q]
                disp = (round(z.real * 1e9), round(z.imag * 1e9))
            fwd = (a, b, disp)
            bwd = (b, a, (-disp[0], -disp[1]))
            if fwd in index:
                darts.append((index[fwd], 1))
            elif bwd in index:
                darts.append((index[bwd], -1))
            else:
                index[fwd] = len(edges)
                edges.append((a, b))
                kinds.append("h" if coords is None and q % 2 == 0 else "v")
                darts.append((index[fwd], 1))
        faces.append(tuple(darts))
    return CellComplex(n * m, tuple(edges), tuple(faces)), kinds


def _cot_weights(cells, coords):
    rho = np.zeros(len(cells.edges))
    for face, z in zip(cells.faces, coords):
        for q, (e, _) in enumerate(face):
            p0, p1, apex = z[q], z[(q + 1) % 3], z[(q + 2) % 3]
            u, w = p0 - apex, p1 - apex
            rho[e] += 0.5 * (u.real * w.real + u.imag * w.imag) / abs(u.real * w.imag - u.imag * w.real)
    return rho


@dataclass(frozen=True)
class ReferenceMatrix:
    name: str
    genus: int
    matrix: np.ndarray
    description: str = ""


TAU_WENTE = 0.41300 + 0.91073j


def reference_matrices():
    s2, s3 = math.sqrt(2.0), math.sqrt(3.0)
    om1 = (1j / 3) * np.array([[5, -4], [-4, 5]])
    om2 = np.array([[-2 + 2 * s2 * 1j, 1 - s2 * 1j], [1 - s2 * 1j, -2 + 2 * s2 * 1j]]) / 3
    om3 = (1j / s3) * np.array([[2, -1], [-1, 2]])
    return [
        ReferenceMatrix("omega1", 2, om1, "three-square translation surface"),
        ReferenceMatrix("omega2", 2, om2, "half-translation surface"),
        ReferenceMatrix("omega3", 2, om3, "six-square half-translation surface"),
        ReferenceMatrix("wente", 1, np.array([[TAU_WENTE]]), "rhombic Wente torus (5 digits)"),
        ReferenceMatrix("lawson", 2, om3.copy(), "Lawson genus 2 surface, conjectured"),
    ]


def reference(name):
    for r in reference_matrices():
        if r.name == name:
            return r
    raise KeyError(f"unknown reference matrix {name!r}")


def load_spec(path_or_file):
    if hasattr(path_or_file, "read"):
        return GluingSpec.from_dict(json.load(path_or_file))
    with open(path_or_file) as fh:
        return GluingSpec.from_dict(json.load(fh))


def builtin_spec(name):
    """Shipped gluing of ``omega1``, ``omega2`` or ``omega3``."""
    text = resources.files("polyperiods.data").joinpath(f"{name}.json").read_text()
    return GluingSpec.from_dict(json.loads(text), name)
