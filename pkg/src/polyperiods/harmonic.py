"""Real harmonic 1-forms with prescribed periods.

For a basis loop ``ℵ`` the form ``ω = c + df`` is sought, where ``c`` is the
integer cocycle counting signed crossings of the dual representative of
``ℵ`` (the cut) and ``f`` solves the weighted Laplace equation with the
unit jump moved to the right-hand side::

    L f = -d0ᵀ ρ c,      f(root) = 0.

Then ``∮_γ ω = γ ∘ ℵ`` for every primal cycle ``γ`` and ``ω`` is closed and
co-closed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .conformal import WeightedSurfaceGraph
from .dec import Cochain1
from .errors import SolverError
from .homology import Cycle, HomologyBasis

__all__ = [
    "HarmonicForm",
    "HarmonicSolver",
    "solve_harmonic",
    "solve_all",
    "conjugate_form",
    "verify_harmonic",
    "holonomy",
    "laplacian_residual",
    "SOLVER_RTOL",
]

SOLVER_RTOL = 1e-11


@dataclass(frozen=True, eq=False)
class HarmonicForm:
    omega: Cochain1  # primal support, real
    star_omega: Cochain1  # dual support, real
    potential: np.ndarray  # f on primal vertices, f(root) = 0
    cycle: int
    solve_residual: float
    closedness: float  # max face-sum defect of ω on primal faces
    dual_closedness: float  # max face-sum defect of *ω on dual faces

    @property
    def residual(self):
        return max(self.closedness, self.dual_closedness)


class HarmonicSolver:
    """Factorizes the pinned primal Laplacian once for repeated solves."""

    def __init__(self, graph: WeightedSurfaceGraph, root=0):
        self.graph = graph
        self.root = int(root)
        V = graph.n_vertices
        keep = np.ones(V, dtype=bool)
        keep[self.root] = False
        self._keep = np.flatnonzero(keep)
        L = graph.laplacian_primal.tocsc()
        self._A = L[self._keep][:, self._keep].tocsc()
        self._lu = splu(self._A) if V > 1 else None

    def potential(self, cut):
        """Jump-harmonic function for the integer cut cocycle ``cut``."""
        g = self.graph
        rhs = -(g.d0_primal.T @ (g.rho * cut))
        f = np.zeros(g.n_vertices)
        if self._lu is not None:
            b = rhs[self._keep]
            x = self._lu.solve(b)
            # one step of iterative refinement
            x = x + self._lu.solve(b - self._A @ x)
            f[self._keep] = x
        full = g.laplacian_primal @ f - rhs
        scale = max(np.abs(rhs).max(initial=0.0), 1.0)
        res = float(np.abs(full[self._keep]).max(initial=0.0)) / scale
        if not res <= SOLVER_RTOL:
            raise SolverError(f"harmonic solve residual {res:.2e} above {SOLVER_RTOL:g}", res)
        return f, res

    def solve(self, cut_cycle: Cycle, k=-1) -> HarmonicForm:
        g = self.graph
        if cut_cycle.host != "dual":
            raise ValueError("the cut must be a dual cycle")
        cut = cut_cycle.chain(g.n_edges).astype(float)
        f, res = self.potential(cut)
        omega = cut + g.d0_primal @ f
        return _make_form(g, omega, f, k, res)


def _make_form(g, omega, f, k, res):
    w = Cochain1.from_parts(g, primal=omega)
    sw = conjugate_form(g, w)
    closed = float(np.abs(g.face_boundary_primal @ omega).max(initial=0.0))
    dual_closed = float(np.abs(g.face_boundary_dual @ sw.dual.real).max(initial=0.0))
    return HarmonicForm(w, sw, f, k, res, closed, dual_closed)


def solve_harmonic(graph: WeightedSurfaceGraph, basis: HomologyBasis, k, root=None) -> HarmonicForm:
    """Harmonic form dual to the ``k``-th basis loop: ``∮_γ ω = γ ∘ ℵ_k``."""
    solver = HarmonicSolver(graph, basis.root if root is None else root)
    return solver.solve(basis.dual_reps[k], k)


def solve_all(graph: WeightedSurfaceGraph, basis: HomologyBasis, root=None):
    """Harmonic forms for every basis loop, sharing one factorization."""
    solver = HarmonicSolver(graph, basis.root if root is None else root)
    return [solver.solve(c, k) for k, c in enumerate(basis.dual_reps)]


def conjugate_form(graph: WeightedSurfaceGraph, omega: Cochain1) -> Cochain1:
    """``*ω`` on the dual graph: the value on ``e*`` is ``ρ(e) ω(e)``."""
    return Cochain1.from_parts(graph, dual=graph.rho * omega.primal)


def verify_harmonic(graph: WeightedSurfaceGraph, form: Cochain1, host="primal") -> float:
    """Largest closedness or co-closedness defect of a form on one graph.

    For ``host="primal"`` the form is read on primal edges; closedness is
    checked on primal faces, co-closedness (closedness of its star) on dual
    faces. ``host="dual"`` swaps the roles.
    """
    g = graph
    if host == "primal":
        a = form.primal
        closed = g.face_boundary_primal @ a
        coclosed = g.face_boundary_dual @ (g.rho * a)
    elif host == "dual":
        a = form.dual
        closed = g.face_boundary_dual @ a
        coclosed = g.face_boundary_primal @ (a / g.rho)
    else:
        raise ValueError(f"unknown host {host!r}")
    return float(max(np.abs(closed).max(initial=0.0), np.abs(coclosed).max(initial=0.0)))


def holonomy(form: Cochain1, cycle: Cycle) -> complex:
    """Oriented sum of the form along a primal or dual cycle."""
    if cycle.host == "primal":
        vals = form.primal
    elif cycle.host == "dual":
        vals = form.dual
    else:
        raise ValueError("holonomy needs a primal or dual cycle")
    if form.support not in ("full", cycle.host):
        raise ValueError(f"form supported on {form.support} graph, cycle on {cycle.host}")
    if not cycle.darts:
        return 0j
    idx, sgn = zip(*cycle.darts)
    return complex(np.sum(vals[list(idx)] * np.array(sgn)))


def laplacian_residual(graph, form: HarmonicForm):
    """max |Δ f| of the jump-corrected potential (co-closedness of ω)."""
    return float(np.abs(graph.d0_primal.T @ (graph.rho * form.omega.primal.real)).max(initial=0.0))

