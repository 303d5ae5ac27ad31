"""Holomorphic bases and period matrices.

Each real harmonic form ``ω_j`` yields the holomorphic form
``θ_j = (Id + i*) ω_j``: ``ω_j`` on primal edges and ``i ρ ω_j`` on dual
edges. The ``θ_j`` span the 2g-dimensional space of discrete holomorphic
forms. The normalized basis ``ζ_k = Σ_j R[k, j] θ_j`` has a-periods
``δ_kℓ`` on the primal *and* on the dual representatives of the a-cycles.

Each b-cycle of the quad graph has a primal and a dual representative, and
the two readings of ``ζ_k`` differ at the scale of the discretization
error: with ``G`` the Gram matrix of the harmonic forms, the dual reading
has imaginary part equal to a Schur complement of ``G`` and the primal
reading has the inverse of a diagonal block, while their real parts are
transposes of each other. Neither is symmetric by itself. Integrating over
the quad-graph cycle itself averages the two readings, which is exactly
symmetric with positive definite imaginary part; this is the reported
period matrix ``Π``. The one-sided readings are kept as ``pi_dual``
(dual representatives) and ``pi_star`` (primal representatives).

The quad-graph reading depends on the homology basis at the scale of the
discretization error. :func:`canonical_period_matrix` gives a
basis-independent alternative: the Hodge star maps primal harmonic forms to
dual ones, which in period coordinates is a real matrix ``Q`` with
eigenvalues ``±iλ``. The eigenvectors for ``-iλ`` span the period vectors
of the holomorphic forms, and their b-part over their a-part is a period
matrix that transforms exactly under a change of symplectic basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conformal import WeightedSurfaceGraph
from .dec import Cochain1, hodge_star
from .errors import NormalizationError, TopologyError
from .harmonic import HarmonicForm, HarmonicSolver, holonomy
from .homology import HomologyBasis, homotopy_basis

__all__ = [
    "HolomorphicBasis",
    "PeriodResult",
    "holomorphic_basis",
    "period_matrix",
    "riemann_check",
    "canonical_period_matrix",
    "compute_periods",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class HolomorphicBasis:
    zetas: tuple  # g Cochain1 on the double graph
    coefficients: np.ndarray  # R, (g, 2g) complex
    normalization_residual: float
    condition: float
    type_defect: float  # max |*ζ + iζ|


@dataclass(frozen=True, eq=False)
class PeriodResult:
    pi: np.ndarray  # quad-graph reading, (pi_dual + pi_star) / 2
    pi_star: np.ndarray  # b-periods on primal representatives
    symmetry_defect: float
    positivity_margin: float
    pi_pi_star: float
    residuals: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    flags: tuple = ()
    pi_dual: np.ndarray | None = None  # b-periods on dual representatives
    pi_canonical: np.ndarray | None = None  # basis-independent variant

    @property
    def genus(self):
        return self.pi.shape[0]

    @property
    def accepted(self):
        return self.positivity_margin > 0

    def to_dict(self):
        def cm(a):
            return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}

        return {
            "genus": self.genus,
            "pi": cm(self.pi),
            "pi_star": cm(self.pi_star),
            "pi_dual": cm(self.pi_dual) if self.pi_dual is not None else None,
            "pi_canonical": cm(self.pi_canonical) if self.pi_canonical is not None else None,
            "symmetry_defect": self.symmetry_defect,
            "positivity_margin": self.positivity_margin,
            "pi_pi_star": self.pi_pi_star,
            "residuals": dict(self.residuals),
            "flags": list(self.flags),
        }


def _theta(graph, form: HarmonicForm):
    w = form.omega.primal.real
    return Cochain1.from_parts(graph, primal=w, dual=1j * graph.rho * w)


def holomorphic_basis(graph: WeightedSurfaceGraph, basis: HomologyBasis, forms) -> HolomorphicBasis:
    """a-normalized holomorphic forms from the 2g harmonic forms.

    Raises :class:`NormalizationError` if the 2g x 2g normalization system
    has condition number above ``COND_LIMIT``.
    """
    g = basis.genus
    if len(forms) != 2 * g:
        raise ValueError(f"need {2 * g} harmonic forms, got {len(forms)}")
    thetas = [_theta(graph, f) for f in forms]
    a = basis.a_indices()
    # rows: a-periods on primal reps, then on dual reps; columns: θ_j
    A = np.array(
        [[holonomy(t, basis.gamma_reps[l]) for t in thetas] for l in a]
        + [[holonomy(t, basis.dual_reps[l]) for t in thetas] for l in a]
    )
    cond = float(np.linalg.cond(A))
    if not cond < COND_LIMIT:
        raise NormalizationError(f"normalization system is singular (cond={cond:.3g})")
    target = np.vstack([np.eye(g), np.eye(g)])
    R = np.linalg.solve(A, target).T  # ζ_k = Σ_j R[k, j] θ_j
    T = np.array([t.values for t in thetas])
    zetas = tuple(Cochain1(graph, R[k] @ T) for k in range(g))
    resid = float(np.abs(R @ A.T - target.T).max(initial=0.0))
    type_defect = max(
        (float(np.abs(hodge_star(z).values + 1j * z.values).max()) for z in zetas),
        default=0.0,
    )
    return HolomorphicBasis(zetas, R, resid, cond, type_defect)


def period_matrix(
    graph, basis: HomologyBasis, hbasis: HolomorphicBasis, provenance=None, canonical=None
) -> PeriodResult:
    """Π on the quad-graph b-cycles, with both one-sided readings and diagnostics."""
    b = basis.b_indices()
    g = basis.genus
    pi_dual = np.array([[holonomy(z, basis.dual_reps[l]) for l in b] for z in hbasis.zetas])
    pi_star = np.array([[holonomy(z, basis.gamma_reps[l]) for l in b] for z in hbasis.zetas])
    pi_dual = pi_dual.reshape(g, g)
    pi_star = pi_star.reshape(g, g)
    pi = 0.5 * (pi_dual + pi_star)
    check = riemann_check(pi, pi_star)
    flags = []
    if check["positivity_margin"] <= 0:
        flags.append("imaginary part not positive definite")
    if hbasis.condition > 1e8:
        flags.append(f"ill-conditioned normalization (cond={hbasis.condition:.2g})")
    return PeriodResult(
        pi,
        pi_star,
        check["symmetry_defect"],
        check["positivity_margin"],
        check["pi_pi_star"],
        {"normalization": hbasis.normalization_residual, "type": hbasis.type_defect},
        dict(provenance or {}),
        tuple(flags),
        pi_dual,
        canonical,
    )


def riemann_check(pi, pi_star=None):
    """Symmetry defect, smallest eigenvalue of Im Π, and ``‖Π − Π*‖∞``.

    Accepts a :class:`PeriodResult` or raw matrices.
    """
    if isinstance(pi, PeriodResult):
        pi, pi_star = pi.pi, pi.pi_star
    pi = np.atleast_2d(np.asarray(pi, dtype=complex))
    sym = float(np.abs(pi - pi.T).max(initial=0.0))
    im = 0.5 * (pi.imag + pi.imag.T)
    margin = float(np.linalg.eigvalsh(im).min()) if pi.size else 0.0
    out = {
        "symmetry_defect": sym,
        "relative_symmetry_defect": sym / max(float(np.abs(pi).max(initial=0.0)), 1e-300),
        "positivity_margin": margin,
        "pi_pi_star": None,
    }
    if pi_star is not None:
        out["pi_pi_star"] = float(np.abs(pi - np.asarray(pi_star)).max(initial=0.0))
    return out


def star_matrix(basis: HomologyBasis, forms):
    """Hodge star on harmonic forms in period coordinates.

    Column k holds the dual periods of ``*ω_k``; multiplying by the inverse
    of the primal period matrix expresses the star as a map of period
    vectors.
    """
    primal = np.array([[holonomy(f.omega, c) for f in forms] for c in basis.gamma_reps]).real
    dual = np.array([[holonomy(f.star_omega, c) for f in forms] for c in basis.dual_reps]).real
    return dual @ np.linalg.inv(primal)


def canonical_period_matrix(basis: HomologyBasis, forms):
    """Basis-independent period matrix from the eigenvectors of the star.

    Raises :class:`NormalizationError` when the eigenvalues do not split
    into g in each half plane or the a-block is singular.
    """
    g = basis.genus
    Q = star_matrix(basis, forms)
    w, V = np.linalg.eig(Q)
    order = np.argsort(w.imag, kind="stable")
    if not (np.all(w.imag[order[:g]] < 0) and np.all(w.imag[order[g:]] > 0)):
        raise NormalizationError("star has real eigenvalues; no complex structure")
    P = V[:, order[:g]]
    cond = np.linalg.cond(P[:g])
    if not cond < COND_LIMIT:
        raise NormalizationError(f"a-periods of the eigenvectors are singular (cond={cond:.3g})")
    return np.linalg.solve(P[:g].T, P[g:].T).T


def compute_periods(graph: WeightedSurfaceGraph, root=0, return_parts=False):
    """Full pipeline: homology basis, harmonic forms, holomorphic basis, Π.

    Raises :class:`TopologyError` for genus 0.
    """
    if graph.genus < 1:
        raise TopologyError("genus 0 surface has no periods")
    basis = homotopy_basis(graph, root)
    solver = HarmonicSolver(graph, root)
    forms = [solver.solve(c, k) for k, c in enumerate(basis.dual_reps)]
    hb = holomorphic_basis(graph, basis, forms)
    E = graph.n_edges
    H = np.array([[holonomy(f.omega, c) for f in forms] for c in basis.gamma_reps]).real
    exact = float(np.abs(H - basis.intersection).max(initial=0.0))
    provenance = {
        "scheme": graph.scheme,
        "vertices": graph.n_vertices,
        "edges": E,
        "faces": graph.n_faces,
        "genus": graph.genus,
        "root": root,
    }
    try:
        canonical = canonical_period_matrix(basis, forms)
    except NormalizationError:
        canonical = None
    result = period_matrix(graph, basis, hb, provenance, canonical)
    result.residuals.update(
        {
            "harmonic": max(f.solve_residual for f in forms),
            "closedness": max(f.residual for f in forms),
            "period_exactness": exact,
            "symmetry": result.symmetry_defect,
            "pi_pi_star": result.pi_pi_star,
        }
    )
    if return_parts:
        return result, basis, forms, hb
    return result
