import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from spincm.errors import DimensionError, StructureError
from spincm.lie import (
    adjoint_action,
    algebra_coordinates,
    as_algebra,
    as_config,
    build_restricted_root_datum,
    build_root_datum,
    cartan_basis,
    commutator,
    dagger,
    dual_pairing,
    fundamental_field,
    invariant_pairing,
    matrix_exp,
    random_algebra,
    random_hermitian,
    random_unitary,
    su_basis,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 5)


def test_commutator_of_commuting_diagonals_vanishes():
    a = np.diag([1.0, 2.0, 3.0])
    b = np.diag([-1.0, 0.5, 4.0])
    assert np.all(commutator(a, b) == 0)


def test_commutator_shape_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


@given(seeds, dims)
@settings(max_examples=30, deadline=None)
def test_bracket_antisymmetry_and_jacobi(seed, n):
    rng = np.random.default_rng(seed)
    X, Y, W = (random_algebra(n, rng) for _ in range(3))
    assert np.allclose(commutator(X, Y), -commutator(Y, X), atol=1e-12)
    jac = (commutator(X, commutator(Y, W)) + commutator(Y, commutator(W, X))
           + commutator(W, commutator(X, Y)))
    assert np.max(np.abs(jac)) < 1e-12


@given(seeds, dims)
@settings(max_examples=30, deadline=None)
def test_bracket_types(seed, n):
    # [g, g] in g, [g, V] in V, [V, V] in g
    rng = np.random.default_rng(seed)
    X, Y = random_algebra(n, rng), random_algebra(n, rng)
    a, b = random_hermitian(n, rng), random_hermitian(n, rng)
    as_algebra(commutator(X, Y), 1e-12)
    as_config(commutator(X, a), 1e-12)
    as_algebra(commutator(a, b), 1e-12)


def test_pairings_positive_definite(rng):
    X = random_algebra(3, rng)
    a = random_hermitian(3, rng)
    assert invariant_pairing(X, X, "algebra") > 0
    assert invariant_pairing(a, a, "config") > 0
    assert dual_pairing(X, X) == pytest.approx(-invariant_pairing(X, X, "algebra"))


def test_pairing_rejects_wrong_space(rng):
    X = random_algebra(3, rng)
    with pytest.raises(StructureError):
        invariant_pairing(X, X, "config")
    with pytest.raises(ValueError):
        invariant_pairing(X, X, "other")


@given(seeds, dims)
@settings(max_examples=25, deadline=None)
def test_pairings_ad_invariant(seed, n):
    rng = np.random.default_rng(seed)
    g = random_unitary(n, rng)
    X, Y = random_algebra(n, rng), random_algebra(n, rng)
    a, b = random_hermitian(n, rng), random_hermitian(n, rng)
    assert invariant_pairing(adjoint_action(g, X), adjoint_action(g, Y), "algebra") == \
        pytest.approx(invariant_pairing(X, Y, "algebra"), abs=1e-10)
    assert invariant_pairing(adjoint_action(g, a), adjoint_action(g, b), "config") == \
        pytest.approx(invariant_pairing(a, b, "config"), abs=1e-10)


@given(seeds, dims)
@settings(max_examples=25, deadline=None)
def test_matrix_exp_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    X = random_algebra(n, rng, scale=2.0)
    g = matrix_exp(X)
    assert np.max(np.abs(g - expm(X))) < 1e-10
    assert np.max(np.abs(g @ dagger(g) - np.eye(n))) < 1e-12
    assert abs(np.linalg.det(g) - 1) < 1e-10


def test_matrix_exp_rejects_hermitian():
    with pytest.raises(StructureError):
        matrix_exp(np.eye(2))


def test_adjoint_derivative_is_bracket(rng):
    X = random_algebra(3, rng)
    Y = random_hermitian(3, rng)
    t = 1e-6
    fd = (adjoint_action(matrix_exp(t * X), Y) - adjoint_action(matrix_exp(-t * X), Y)) / (2 * t)
    assert np.max(np.abs(fd - fundamental_field(X, Y))) < 1e-6


def test_adjoint_rejects_non_unitary():
    with pytest.raises(StructureError):
        adjoint_action(2 * np.eye(2), np.eye(2))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_su_basis_orthonormal(n):
    basis = su_basis(n)
    assert len(basis) == n * n - 1
    G = np.array([[invariant_pairing(u, v, "algebra") for v in basis] for u in basis])
    assert np.allclose(G, np.eye(len(basis)), atol=1e-14)


def test_algebra_coordinates_round_trip(rng):
    basis = su_basis(3)
    X = random_algebra(3, rng)
    c = algebra_coordinates(X, basis)
    assert np.allclose(sum(ci * b for ci, b in zip(c, basis)), X, atol=1e-14)


def test_cartan_basis_orthonormal():
    H = cartan_basis(4)
    G = np.array([[np.trace(a @ b).real for b in H] for a in H])
    assert np.allclose(G, np.eye(3), atol=1e-14)
    assert all(abs(np.trace(h)) < 1e-15 for h in H)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_restricted_root_relations(n, rng):
    # ad(v) E = lam(v) B and ad(v) B = lam(v) E for diagonal v
    datum = build_restricted_root_datum(n)
    v = rng.normal(size=n)
    V = np.diag(v).astype(complex)
    for k, (Es, Bs) in enumerate(zip(datum.E, datum.B)):
        lam = datum.root_value(k, v)
        for E, B in zip(Es, Bs):
            assert np.max(np.abs(commutator(V, E) - lam * B)) < 1e-13
            assert np.max(np.abs(commutator(V, B) - lam * E)) < 1e-13
            as_algebra(E)
            as_config(B)


def test_root_datum_counts():
    d = build_root_datum(3)
    assert len(d.roots) == 6
    assert d.value((0, 2), np.array([3.0, 1.0, -1.0])) == 4.0
    with pytest.raises(ValueError):
        build_root_datum(1)
