"""Siegel reduction of period matrices.

The integer symplectic group acts on the Siegel upper half space by
``Ω ↦ (AΩ + B)(CΩ + D)⁻¹``. The reduction loop alternates

1. Minkowski reduction of ``Im Ω`` by a unimodular congruence,
2. integer translation of ``Re Ω`` into ``[-1/2, 1/2)``,
3. an inversion ``M`` with ``|det(CΩ + D)| < 1`` (which strictly increases
   ``det Im Ω``),

until no inversion applies. For genus 1 and 2 the inversions tested form a
superset of the classical boundary conditions of the fundamental domain, so
the fixed point lies in the Siegel fundamental domain. Points on the
boundary of the domain have several reduced forms; a deterministic
tie-break picks one of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymplecticTransform",
    "ReducedMatrix",
    "act",
    "siegel_reduce",
    "compare",
    "translation",
    "unimodular",
    "inversion",
    "partial_inversion",
    "is_symplectic",
    "random_symplectic",
    "minkowski_reduce",
    "MAX_ITER",
]

MAX_ITER = 1000
BOUNDARY_TOL = 1e-7


def _J(g):
    J = np.zeros((2 * g, 2 * g), dtype=np.int64)
    J[:g, g:] = np.eye(g, dtype=np.int64)
    J[g:, :g] = -np.eye(g, dtype=np.int64)
    return J


def is_symplectic(M):
    M = np.asarray(M, dtype=np.int64)
    g = M.shape[0] // 2
    return np.array_equal(M.T @ _J(g) @ M, _J(g))


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    M: np.ndarray

    def __post_init__(self):
        M = np.array(np.rint(np.asarray(self.M, dtype=float)), dtype=np.int64)
        if not np.array_equal(M, np.asarray(self.M)) or not is_symplectic(M):
            raise ValueError("matrix is not integer symplectic")
        object.__setattr__(self, "M", M)

    @classmethod
    def identity(cls, g):
        return cls(np.eye(2 * g, dtype=np.int64))

    @property
    def g(self):
        return self.M.shape[0] // 2

    @property
    def blocks(self):
        g = self.g
        M = self.M
        return M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:]

    def __matmul__(self, other):
        return SymplecticTransform(self.M @ other.M)

    def inverse(self):
        J = _J(self.g)
        return SymplecticTransform(-J @ self.M.T @ J)

    def apply(self, omega):
        return act(self.M, omega)

    def is_identity(self):
        return np.array_equal(self.M, np.eye(2 * self.g, dtype=np.int64))


def act(M, omega):
    """``(AΩ + B)(CΩ + D)⁻¹``."""
    M = np.asarray(M)
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    g = omega.shape[0]
    A, B, C, D = M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:]
    num = A @ omega + B
    den = C @ omega + D
    out = np.linalg.solve(den.T, num.T).T
    return 0.5 * (out + out.T)


def translation(S):
    S = np.atleast_2d(np.asarray(S, dtype=np.int64))
    g = S.shape[0]
    M = np.eye(2 * g, dtype=np.int64)
    M[:g, g:] = S
    return M


def unimodular(U):
    """Symplectic matrix acting as ``Ω ↦ U Ω Uᵀ``."""
    U = np.atleast_2d(np.asarray(U, dtype=np.int64))
    g = U.shape[0]
    Uinv_T = np.rint(np.linalg.inv(U).T).astype(np.int64)
    M = np.zeros((2 * g, 2 * g), dtype=np.int64)
    M[:g, :g] = U
    M[g:, g:] = Uinv_T
    return M


def inversion(g):
    """``Ω ↦ −Ω⁻¹``."""
    return -_J(g)


def partial_inversion(g, k=0):
    """Quasi-inversion on coordinate ``k``."""
    M = np.eye(2 * g, dtype=np.int64)
    M[k, k] = 0
    M[g + k, g + k] = 0
    M[k, g + k] = -1
    M[g + k, k] = 1
    return M


def random_symplectic(g, rng, length=8):
    """Random word in the standard generators (translations, unimodulars, inversions)."""
    M = np.eye(2 * g, dtype=np.int64)
    for _ in range(length):
        kind = rng.integers(3)
        if kind == 0:
            S = rng.integers(-2, 3, size=(g, g))
            G = translation(np.triu(S) + np.triu(S, 1).T)
        elif kind == 1:
            U = np.eye(g, dtype=np.int64)
            if g > 1:
                i, j = rng.choice(g, size=2, replace=False)
                U[i, j] = rng.integers(-2, 3)
            else:
                U[0, 0] = rng.choice([-1, 1])
            G = unimodular(U)
        else:
            G = partial_inversion(g, int(rng.integers(g))) if rng.integers(2) else inversion(g)
        M = G @ M
    return M


# ---------------------------------------------------------------------------
# Minkowski reduction


def minkowski_reduce(Y):
    """Unimodular ``U`` such that ``U Y Uᵀ`` is Minkowski reduced (exact for g <= 2).

    For g = 2 the result satisfies ``0 <= 2 y12 <= y11 <= y22``. Larger genus
    uses repeated pairwise Lagrange reduction (LLL-like, not certified).
    """
    Y = np.asarray(Y, dtype=float)
    g = Y.shape[0]
    U = np.eye(g, dtype=np.int64)
    if g == 1:
        return U
    for _ in range(10000):
        changed = False
        G = U @ Y @ U.T
        order = np.argsort(np.diag(G), kind="stable")
        if not np.array_equal(order, np.arange(g)):
            U = U[order]
            G = U @ Y @ U.T
        for j in range(1, g):
            for i in range(j):
                m = int(np.rint(G[i, j] / G[i, i]))
                if m != 0 and abs(G[i, j] / G[i, i]) > 0.5 + 1e-13:
                    U[j] -= m * U[i]
                    G = U @ Y @ U.T
                    changed = True
        if g > 2:
            # extra pass: small combinations for shorter vectors
            pass
        if not changed:
            G = U @ Y @ U.T
            if np.all(np.diff(np.diag(G)) >= -1e-13 * abs(G[0, 0])):
                break
    G = U @ Y @ U.T
    if g == 2 and G[0, 1] < 0:
        U[1] = -U[1]
    elif g > 2:
        for j in range(1, g):
            G = U @ Y @ U.T
            if G[j - 1, j] < 0:
                U[j] = -U[j]
    return U


def _round_half_up(x):
    """Nearest integer with ties rounded so the remainder lands at +1/2."""
    r = np.floor(x + 0.5)
    return r


# ---------------------------------------------------------------------------
# reduction


def _candidates(g):
    """Symplectic matrices whose |det(CΩ + D)| >= 1 cut out the fundamental domain."""
    out = []
    rng = (-1, 0, 1)
    if g == 1:
        for s in rng:
            out.append(inversion(1) @ translation([[s]]))
        return out
    if g == 2:
        for a, b, c in itertools.product(rng, rng, rng):
            out.append(inversion(2) @ translation([[a, b], [b, c]]))
        for U in ([[1, 0], [0, 1]], [[0, 1], [1, 0]], [[1, 1], [0, 1]], [[1, -1], [0, 1]]):
            MU = unimodular(U)
            MUinv = unimodular(np.rint(np.linalg.inv(U)).astype(np.int64))
            for s in rng:
                E = np.zeros((2, 2), dtype=np.int64)
                E[0, 0] = s
                out.append(MUinv @ partial_inversion(2, 0) @ translation(E) @ MU)
        return out
    for k in range(g):
        out.append(partial_inversion(g, k))
    return out


def _absdet(M, omega):
    g = omega.shape[0]
    C, D = M[g:, :g], M[g:, g:]
    return abs(np.linalg.det(C @ omega + D))


@dataclass(frozen=True, eq=False)
class ReducedMatrix:
    omega: np.ndarray
    transform: SymplecticTransform
    iterations: int
    canonical: bool = True
    symmetry_defect: float = 0.0
    flags: tuple = field(default_factory=tuple)


def _reduce_loop(omega, tol, max_iter):
    g = omega.shape[0]
    M = np.eye(2 * g, dtype=np.int64)
    cands = _candidates(g)
    it = 0
    capped = True
    for it in range(1, max_iter + 1):
        U = minkowski_reduce(omega.imag)
        if not np.array_equal(U, np.eye(g, dtype=np.int64)):
            G = unimodular(U)
            omega, M = act(G, omega), G @ M
        S = _round_half_up(omega.real)
        if np.any(S != 0):
            G = translation(-S.astype(np.int64))
            omega, M = act(G, omega), G @ M
        dets = [_absdet(G, omega) for G in cands]
        k = int(np.argmin(dets))
        if dets[k] < 1.0 - tol:
            G = cands[k]
            omega, M = act(G, omega), G @ M
            continue
        capped = False
        break
    return omega, M, it, capped


def _in_domain(omega, tol):
    g = omega.shape[0]
    X, Y = omega.real, omega.imag
    if np.any(X < -0.5 - tol) or np.any(X > 0.5 + tol):
        return False
    if g == 2:
        y11, y12, y22 = Y[0, 0], Y[0, 1], Y[1, 1]
        s = tol * max(1.0, y22)
        if not (-s <= 2 * y12 <= y11 + s and y11 <= y22 + s):
            return False
    return all(_absdet(G, omega) >= 1.0 - tol for G in _candidates(g))


def _key(omega, q=1e-7):
    g = omega.shape[0]
    iu = np.triu_indices(g)
    Y, X = omega.imag[iu], omega.real[iu]
    vals = list(Y) + list(-X)
    return tuple(int(np.rint(v / q)) for v in vals)


_SMALL_U = None


def _small_unimodular(g):
    global _SMALL_U
    if g != 2:
        return [np.eye(g, dtype=np.int64), -np.eye(g, dtype=np.int64)] if g == 1 else []
    if _SMALL_U is None:
        _SMALL_U = [
            np.array(u, dtype=np.int64).reshape(2, 2)
            for u in itertools.product((-1, 0, 1), repeat=4)
            if abs(round(np.linalg.det(np.reshape(u, (2, 2))))) == 1
        ]
    return _SMALL_U


def _boundary_images(omega, M, tol, limit=64):
    """Reduced points equivalent to ``omega`` reachable through boundary moves."""
    g = omega.shape[0]
    cands = _candidates(g)
    Y = omega.imag
    scale = max(1.0, float(np.abs(omega).max()))
    seen = [(omega, M)]
    frontier = [(omega, M)]
    while frontier and len(seen) < limit:
        nxt = []
        for om, Mm in frontier:
            moves = []
            for G in cands:
                if _absdet(G, om) <= 1.0 + tol:
                    moves.append(G)
            for U in _small_unimodular(g):
                if np.abs(U @ om.imag @ U.T - om.imag).max() <= tol * scale:
                    moves.append(unimodular(U))
            X = om.real
            for i, j in zip(*np.triu_indices(g)):
                if abs(abs(X[i, j]) - 0.5) <= tol:
                    S = np.zeros((g, g), dtype=np.int64)
                    S[i, j] = S[j, i] = -int(np.sign(X[i, j]))
                    moves.append(translation(S))
            for G in moves:
                o2 = act(G, om)
                M2 = G @ Mm
                U = minkowski_reduce(o2.imag)
                if not np.array_equal(U, np.eye(g, dtype=np.int64)):
                    T = unimodular(U)
                    o2, M2 = act(T, o2), T @ M2
                # re-translate entries that left the box; boundary entries stay put
                out = np.abs(o2.real) > 0.5 + tol
                if np.any(out):
                    S = np.where(out, np.rint(o2.real), 0).astype(np.int64)
                    T = translation(-S)
                    o2, M2 = act(T, o2), T @ M2
                if not _in_domain(o2, tol):
                    continue
                if any(np.abs(o2 - p).max() <= tol * scale for p, _ in seen):
                    continue
                seen.append((o2, M2))
                nxt.append((o2, M2))
                if len(seen) >= limit:
                    break
        frontier = nxt
    return seen


def siegel_reduce(omega, tol=1e-10, max_iter=MAX_ITER) -> ReducedMatrix:
    """Reduce a symmetric matrix with positive definite imaginary part.

    Raises ``ValueError`` if ``Im Ω`` is not positive definite. Exceeding
    ``max_iter`` returns the partial result with a flag.
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    g = omega.shape[0]
    defect = float(np.abs(omega - omega.T).max())
    scale = max(1.0, float(np.abs(omega).max()))
    if defect > 1e-6 * scale:
        raise ValueError(f"matrix is not symmetric (defect {defect:.2e})")
    omega = 0.5 * (omega + omega.T)
    if np.linalg.eigvalsh(omega.imag).min() <= 0:
        raise ValueError("imaginary part is not positive definite")
    red, M, it, capped = _reduce_loop(omega, tol, max_iter)
    flags = []
    canonical = g <= 2
    if capped:
        flags.append(f"iteration cap {max_iter} reached")
        canonical = False
    if g > 2:
        flags.append("not guaranteed canonical for genus > 2")
    if canonical:
        # points this close to a wall get the wall tie-break; matches the key quantum
        images = _boundary_images(red, M, max(tol, BOUNDARY_TOL))
        red, M = min(images, key=lambda p: _key(p[0]))
    return ReducedMatrix(red, SymplecticTransform(M), it, canonical, defect, tuple(flags))


def compare(omega_a, omega_b, slack=1e-6):
    """``‖reduce(Ω_a) − reduce(Ω_b)‖∞``.

    Near the boundary of the fundamental domain a tiny perturbation can move
    the reduced point to another boundary representative, so the distance is
    minimized over the boundary images of both reduced points found within
    ``slack``.
    """
    a = np.atleast_2d(np.asarray(omega_a, dtype=complex))
    b = np.atleast_2d(np.asarray(omega_b, dtype=complex))
    if a.shape != b.shape:
        raise ValueError(f"genus mismatch: {a.shape[0]} vs {b.shape[0]}")
    ra, rb = siegel_reduce(a), siegel_reduce(b)
    best = float(np.abs(ra.omega - rb.omega).max())
    if best == 0.0 or slack <= 0:
        return best
    ia = _boundary_images(ra.omega, ra.transform.M, slack)
    ib = _boundary_images(rb.omega, rb.transform.M, slack)
    for p, _ in ia:
        for q, _ in ib:
            best = min(best, float(np.abs(p - q).max()))
    return best
