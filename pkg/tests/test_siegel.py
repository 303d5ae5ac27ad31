import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyperiods import SymplecticTransform, compare, reference, siegel_reduce
from polyperiods.siegel import (
    act,
    inversion,
    is_symplectic,
    minkowski_reduce,
    partial_inversion,
    random_symplectic,
    translation,
    unimodular,
)

NAMES = ["omega1", "omega2", "omega3"]


def random_period_matrix(g, rng):
    A = rng.normal(size=(g, g))
    X = rng.uniform(-2, 2, size=(g, g))
    return (X + X.T) / 2 + 1j * (A @ A.T + 0.2 * np.eye(g))


def test_translation_to_box():
    r = siegel_reduce([[5 + 2j]])
    assert abs(r.omega[0, 0] - 2j) <= 1e-15
    assert r.canonical


def test_inversion_of_small_modulus():
    assert abs(siegel_reduce([[0.25j]]).omega[0, 0] - 4j) <= 1e-14


def test_transform_reproduces_result(rng):
    for g in (1, 2):
        om = random_period_matrix(g, rng)
        r = siegel_reduce(om)
        np.testing.assert_allclose(r.transform.apply(om), r.omega, atol=1e-10)


@pytest.mark.parametrize("name", NAMES)
def test_idempotent(name):
    r = siegel_reduce(reference(name).matrix)
    again = siegel_reduce(r.omega)
    assert np.abs(again.omega - r.omega).max() <= 1e-12
    # the transform may be a nontrivial stabilizer of a boundary point
    assert np.abs(again.transform.apply(r.omega) - r.omega).max() <= 1e-12


@pytest.mark.parametrize("name", NAMES)
def test_invariant_under_symplectic_group(name, rng):
    om = reference(name).matrix
    base = siegel_reduce(om).omega
    for _ in range(20):
        M = random_symplectic(2, rng)
        assert np.abs(siegel_reduce(act(M, om)).omega - base).max() <= 1e-8


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), g=st.integers(1, 2))
def test_invariance_random_points(seed, g):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    base = siegel_reduce(om).omega
    M = random_symplectic(g, rng, length=6)
    moved = act(M, om)
    assert compare(moved, om) <= 1e-8 * max(1.0, np.abs(base).max())


@settings(max_examples=100, deadline=None)
@given(re=st.floats(-20, 20), im=st.floats(1e-3, 50))
def test_genus_one_fundamental_domain(re, im):
    tau = siegel_reduce([[complex(re, im)]]).omega[0, 0]
    assert -0.5 - 1e-12 <= tau.real <= 0.5 + 1e-12
    assert abs(tau) >= 1 - 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_genus_two_domain_conditions(seed):
    om = siegel_reduce(random_period_matrix(2, np.random.default_rng(seed))).omega
    X, Y = om.real, om.imag
    assert np.all(np.abs(X) <= 0.5 + 1e-9)
    assert -1e-9 <= 2 * Y[0, 1] <= Y[0, 0] + 1e-9
    assert Y[0, 0] <= Y[1, 1] + 1e-9
    assert Y[0, 0] >= np.sqrt(3) / 2 - 1e-9


def test_minkowski_conditions(rng):
    for _ in range(50):
        A = rng.normal(size=(2, 2))
        Y = A @ A.T + 0.01 * np.eye(2)
        U = minkowski_reduce(Y)
        assert round(abs(np.linalg.det(U))) == 1
        R = U @ Y @ U.T
        assert 0 <= 2 * R[0, 1] + 1e-12 and 2 * R[0, 1] <= R[0, 0] + 1e-12 and R[0, 0] <= R[1, 1] + 1e-12


def test_generators_are_symplectic(rng):
    S = np.array([[1, 2], [2, -1]])
    for M in (translation(S), unimodular([[1, 1], [0, 1]]), inversion(2), partial_inversion(2, 1), random_symplectic(2, rng)):
        assert is_symplectic(M)
    assert not is_symplectic(np.diag([2, 1, 1, 1]))


def test_transform_group_operations(rng):
    T = SymplecticTransform(random_symplectic(2, rng))
    assert (T @ T.inverse()).is_identity()
    assert SymplecticTransform.identity(2).is_identity()
    with pytest.raises(ValueError, match="symplectic"):
        SymplecticTransform(np.diag([2, 1, 1, 1]))


def test_rejects_invalid_input():
    with pytest.raises(ValueError, match="symmetric"):
        siegel_reduce([[1j, 0.5], [0, 1j]])
    with pytest.raises(ValueError, match="positive definite"):
        siegel_reduce([[1j, 0], [0, -1j]])


def test_iteration_cap_is_flagged():
    r = siegel_reduce([[1e-6j]], max_iter=1)
    assert not r.canonical and r.flags


def test_higher_genus_is_flagged(rng):
    r = siegel_reduce(random_period_matrix(3, rng))
    assert not r.canonical
    assert any("genus" in f for f in r.flags)


def test_compare_same_is_zero():
    for name in NAMES:
        assert compare(reference(name).matrix, reference(name).matrix) == 0


def test_compare_distinct_surfaces():
    assert compare(reference("omega1").matrix, reference("omega3").matrix) > 0.1
    assert compare(reference("omega1").matrix, reference("omega2").matrix) > 0.1


def test_compare_genus_mismatch():
    with pytest.raises(ValueError, match="genus mismatch"):
        compare(reference("omega1").matrix, [[1j]])


def test_compare_across_boundary():
    # two points just either side of Re = 1/2 reduce to opposite edges of the domain
    a = np.array([[0.5 - 1e-9 + 2j]])
    b = np.array([[0.5 + 1e-9 + 2j]])
    assert compare(a, b) <= 1e-8
