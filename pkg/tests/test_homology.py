import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from meshes import TETRA_OBJ

from polyperiods import build_structure, build_structure_from_cells, homotopy_basis, load_mesh
from polyperiods.homology import (
    canonical_form,
    face_boundary_cycle,
    graph_representatives,
    intersection_number,
    quad_adjacency,
    spanning_tree,
    symplectic_reduction,
)
from test_conformal import MINIMAL_TORUS

SURFACES = ["torus-4x4", "torus-3x5", "omega1-n1", "omega1-n3", "omega2-n4", "omega3-n2"]


def test_tree_of_path():
    adj = [[(1, 0)], [(0, 0), (2, 1)], [(1, 1)]]
    assert spanning_tree(adj, root=2).edges() == {0, 1}


def test_tree_of_square():
    adj = [[(1, 0), (3, 3)], [(0, 0), (2, 1)], [(1, 1), (3, 2)], [(2, 2), (0, 3)]]
    tree = spanning_tree(adj, 0)
    assert len(tree.edges()) == 3
    assert tree.depth.tolist() == [0, 1, 2, 1]


def test_disconnected_tree():
    with pytest.raises(ValueError, match="disconnected"):
        spanning_tree([[(1, 0)], [(0, 0)], []], 0)


def test_quad_graph_tree_of_minimal_torus():
    g = build_structure_from_cells(MINIMAL_TORUS, 1.0)
    adj = quad_adjacency(g)
    assert len(adj) == 2
    assert len(spanning_tree(adj, 0).edges()) == len(adj) - 1


def test_minimal_torus_basis():
    g = build_structure_from_cells(MINIMAL_TORUS, 1.0)
    basis = homotopy_basis(g)
    assert len(basis) == 2
    # the first loop runs along one edge; the two chains generate Z^2
    assert len(basis.gamma_reps[0]) == 1
    chains = np.array([c.chain(2) for c in basis.gamma_reps])
    assert abs(round(np.linalg.det(chains))) == 1
    np.testing.assert_array_equal(basis.intersection, canonical_form(1))


def test_sphere_has_no_cycles():
    basis = homotopy_basis(build_structure(load_mesh(TETRA_OBJ)))
    assert len(basis) == 0 and basis.genus == 0


@pytest.mark.parametrize("name", SURFACES)
def test_basis_is_symplectic(surfaces, name):
    g = surfaces[name]
    basis = homotopy_basis(g)
    assert len(basis) == 2 * g.genus
    np.testing.assert_array_equal(basis.intersection, canonical_form(g.genus))


@pytest.mark.parametrize("name", SURFACES)
def test_representatives_are_closed_and_homologous(surfaces, name):
    g = surfaces[name]
    basis = homotopy_basis(g)
    E = g.n_edges
    for p, q in zip(basis.gamma_reps, basis.dual_reps):
        assert not np.any(g.d0_primal.T @ p.chain(E))
        assert not np.any(g.d0_dual.T @ q.chain(E))
    n = len(basis)
    for i in range(n):
        for j in range(n):
            a = intersection_number(basis.gamma_reps[i], basis.dual_reps[j], E)
            b = intersection_number(basis.dual_reps[i], basis.gamma_reps[j], E)
            assert a == b


@pytest.mark.parametrize("name", SURFACES)
def test_cycles_start_at_root(surfaces, name):
    g = surfaces[name]
    root = g.n_vertices - 1
    basis = homotopy_basis(g, root=root)
    for c in basis.cycles:
        assert c.vertices(g)[0] == root


def test_reversal_reverses_representatives(surfaces):
    g = surfaces["omega2-n4"]
    E = g.n_edges
    for c in homotopy_basis(g).cycles:
        p, q = graph_representatives(g, c)
        pr, qr = graph_representatives(g, c.reversed())
        np.testing.assert_array_equal(pr.chain(E), -p.chain(E))
        np.testing.assert_array_equal(qr.chain(E), -q.chain(E))


def test_intersection_bilinear(surfaces):
    g = surfaces["omega1-n3"]
    basis = homotopy_basis(g)
    a, b = basis.gamma_reps[0], basis.dual_reps[2]
    E = g.n_edges
    assert intersection_number(a, b, E) == 1
    assert intersection_number(a.repeated(2), b, E) == 2
    assert intersection_number(a, b.repeated(-3), E) == -3
    assert intersection_number(b, a, E) == -1


def test_face_boundary_meets_nothing(surfaces):
    g = surfaces["omega3-n2"]
    basis = homotopy_basis(g)
    c = face_boundary_cycle(g, 3)
    assert all(intersection_number(c, d, g.n_edges) == 0 for d in basis.dual_reps)


def test_unnormalized_basis_is_unimodular(surfaces):
    g = surfaces["omega3-n2"]
    basis = homotopy_basis(g, normalize=False)
    assert round(abs(np.linalg.det(basis.intersection))) == 1


def test_reduction_keeps_canonical_input():
    J = canonical_form(1)
    np.testing.assert_array_equal(symplectic_reduction(J), np.eye(2, dtype=int))


def test_reduction_of_swapped_torus_basis():
    M = -canonical_form(1)  # basis (b, a)
    S = symplectic_reduction(M)
    np.testing.assert_array_equal(S @ M @ S.T, canonical_form(1))


def test_reduction_rejects_degenerate():
    with pytest.raises(ValueError):
        symplectic_reduction(np.array([[0, 2], [-2, 0]]))
    with pytest.raises(ValueError):
        symplectic_reduction(np.zeros((2, 2), dtype=int))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), g=st.integers(1, 3))
def test_reduction_exact(seed, g):
    rng = np.random.default_rng(seed)
    A = np.eye(2 * g, dtype=np.int64)
    for _ in range(10):
        i, j = rng.choice(2 * g, size=2, replace=False)
        E = np.eye(2 * g, dtype=np.int64)
        E[i, j] = rng.integers(-3, 4)
        A = E @ A
    A = A[rng.permutation(2 * g)]
    M = A @ canonical_form(g) @ A.T
    S = symplectic_reduction(M)
    np.testing.assert_array_equal(S @ M @ S.T, canonical_form(g))
    assert round(abs(np.linalg.det(S))) == 1
