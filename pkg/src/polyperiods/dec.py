"""Discrete exterior calculus on the double graph and the quad-graph.

Cochains are complex throughout. Layouts:

* 0-cochains: ``V + F`` values, primal vertices first, then dual vertices
  (primal faces).
* 1-cochains: ``2E`` values, ``values[e]`` is the integral over the primal
  edge ``e`` and ``values[E + e]`` the integral over its dual ``e*``, both
  along the stored reference orientations.
* 2-cochains: one value per quad, i.e. per primal edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import WeightedSurfaceGraph

__all__ = [
    "Cochain0",
    "Cochain1",
    "Cochain2",
    "d0",
    "d1",
    "hodge_star",
    "wedge",
    "inner_product",
    "norm",
    "laplacian",
    "type_projection",
    "dirichlet_energy",
    "conformal_energy",
    "area",
    "is_closed",
]

SUPPORTS = ("primal", "dual", "full")


def _support_of(values, E):
    p = np.any(values[:E] != 0)
    q = np.any(values[E:] != 0)
    if p and not q:
        return "primal"
    if q and not p:
        return "dual"
    return "full"


@dataclass(frozen=True, eq=False)
class Cochain0:
    graph: WeightedSurfaceGraph
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.graph.n_lambda_vertices,):
            raise ValueError(f"expected {self.graph.n_lambda_vertices} values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_parts(cls, graph, primal=None, dual=None):
        """Assemble from per-graph values; a missing part is zero."""
        p = np.zeros(graph.n_vertices, complex) if primal is None else primal
        q = np.zeros(graph.n_faces, complex) if dual is None else dual
        return cls(graph, np.concatenate([np.asarray(p, complex), np.asarray(q, complex)]))

    @property
    def primal(self):
        return self.values[: self.graph.n_vertices]

    @property
    def dual(self):
        return self.values[self.graph.n_vertices:]

    def conj(self):
        return Cochain0(self.graph, self.values.conj())

    def __add__(self, other):
        return Cochain0(self.graph, self.values + other.values)

    def __sub__(self, other):
        return Cochain0(self.graph, self.values - other.values)

    def __mul__(self, c):
        return Cochain0(self.graph, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Cochain1:
    graph: WeightedSurfaceGraph
    values: np.ndarray
    support: str | None = None

    def __post_init__(self):
        E = self.graph.n_edges
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (2 * E,):
            raise ValueError(f"expected {2 * E} values, got {v.shape}")
        object.__setattr__(self, "values", v)
        if self.support is None:
            object.__setattr__(self, "support", _support_of(v, E))
        elif self.support not in SUPPORTS:
            raise ValueError(f"unknown support {self.support!r}")

    @classmethod
    def from_parts(cls, graph, primal=None, dual=None):
        E = graph.n_edges
        p = np.zeros(E, complex) if primal is None else np.asarray(primal, complex)
        q = np.zeros(E, complex) if dual is None else np.asarray(dual, complex)
        support = "full"
        if primal is None and dual is not None:
            support = "dual"
        elif dual is None and primal is not None:
            support = "primal"
        return cls(graph, np.concatenate([p, q]), support)

    @property
    def primal(self):
        return self.values[: self.graph.n_edges]

    @property
    def dual(self):
        return self.values[self.graph.n_edges:]

    def conj(self):
        return Cochain1(self.graph, self.values.conj(), self.support)

    def __add__(self, other):
        return Cochain1(self.graph, self.values + other.values)

    def __sub__(self, other):
        return Cochain1(self.graph, self.values - other.values)

    def __neg__(self):
        return Cochain1(self.graph, -self.values, self.support)

    def __mul__(self, c):
        return Cochain1(self.graph, self.values * c, self.support)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Cochain2:
    graph: WeightedSurfaceGraph
    values: np.ndarray

    def total(self):
        return complex(np.sum(self.values))


def d0(f: Cochain0) -> Cochain1:
    """Exterior derivative: ``(df)(x, x') = f(x') - f(x)`` on every edge of the double graph."""
    g = f.graph
    return Cochain1(g, g.d0_lambda @ f.values)


def d1(alpha: Cochain1):
    """Oriented boundary sums over primal faces and over dual faces.

    Returns ``(primal_face_sums, dual_face_sums)``; the dual faces are indexed
    by the primal vertex they surround. ``alpha`` is closed iff both vanish.
    """
    g = alpha.graph
    return g.face_boundary_primal @ alpha.primal, g.face_boundary_dual @ alpha.dual


def is_closed(alpha: Cochain1, tol=1e-9):
    p, q = d1(alpha)
    m = max(np.abs(p).max(initial=0.0), np.abs(q).max(initial=0.0))
    return m <= tol


def hodge_star(alpha: Cochain1) -> Cochain1:
    """``∫_{e*} *α = ρ(e) ∫_e α`` and ``∫_e *α = -∫_{e*} α / ρ(e)``; squares to ``-Id``."""
    g = alpha.graph
    out = np.concatenate([-alpha.dual / g.rho, g.rho * alpha.primal])
    support = {"primal": "dual", "dual": "primal"}.get(alpha.support, "full")
    return Cochain1(g, out, support)


def wedge(alpha: Cochain1, beta: Cochain1) -> Cochain2:
    """Per quad: ``½(α(e) β(e*) − α(e*) β(e))``."""
    return Cochain2(
        alpha.graph,
        0.5 * (alpha.primal * beta.dual - alpha.dual * beta.primal),
    )


def inner_product(alpha: Cochain1, beta: Cochain1) -> complex:
    """``(α, β) = ½ Σ_{Λ₁} ρ(e) α(e) conj(β(e))``, with ``ρ(e*) = 1/ρ(e)``."""
    w = alpha.graph.rho_lambda
    return complex(0.5 * np.sum(w * alpha.values * beta.values.conj()))


def norm(alpha: Cochain1) -> float:
    return float(np.sqrt(max(inner_product(alpha, alpha).real, 0.0)))


def laplacian(f: Cochain0) -> Cochain0:
    """``(Δf)(x) = Σ_{x'~x} ρ(x, x') (f(x) − f(x'))`` separately on each graph."""
    g = f.graph
    return Cochain0.from_parts(
        g, g.laplacian_primal @ f.primal, g.laplacian_dual @ f.dual
    )


def type_projection(alpha: Cochain1, kind="(1,0)") -> Cochain1:
    """``π₁₀ = ½(Id + i*)`` and ``π₀₁ = ½(Id − i*)``."""
    star = hodge_star(alpha)
    if kind in ("(1,0)", (1, 0), "10"):
        return Cochain1(alpha.graph, 0.5 * (alpha.values + 1j * star.values))
    if kind in ("(0,1)", (0, 1), "01"):
        return Cochain1(alpha.graph, 0.5 * (alpha.values - 1j * star.values))
    raise ValueError(f"unknown type {kind!r}")


def dirichlet_energy(f: Cochain0) -> float:
    """``E_D(f) = ½ Σ_{Λ₁} ρ |f(x') − f(x)|²``."""
    df = d0(f)
    return float(0.5 * np.sum(f.graph.rho_lambda * np.abs(df.values) ** 2))


def conformal_energy(f: Cochain0) -> float:
    """``E_C(f) = ½ ‖df − i *df‖²``; zero exactly for holomorphic ``f``."""
    df = d0(f)
    defect = df - 1j * hodge_star(df)
    return 0.5 * norm(defect) ** 2


def area(f: Cochain0) -> float:
    """Algebraic area of the image of ``f``: ``(i/2) ∬ df ∧ conj(df)``."""
    df = d0(f)
    return float((0.5j * wedge(df, df.conj()).total()).real)
