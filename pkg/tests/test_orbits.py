import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spincm.errors import IllConditionedError, OrbitSearchError, StructureError
from spincm.lie import commutator, random_algebra
from spincm.orbits import (
    OrbitSpec,
    casimirs,
    kks_form,
    minimal_orbit_normal_form,
    orbit_dimension,
    orbit_generator,
    project_to_ann_m,
    random_orbit_sample,
    spectrum,
)


def test_rank_one_spec():
    spec = OrbitSpec.from_rank_one([1.0, 1.0, 1.0])
    assert spec.rank_one[1] == pytest.approx(1.0)
    assert spec.is_minimal_balanced()
    assert abs(np.trace(spec.generator)) < 1e-14
    assert np.allclose(spectrum(spec.generator), [-1, -1, 2])


def test_rank_one_inconsistent_c():
    v = np.array([1.0, 1.0])
    Z = 1j * (np.outer(v, v) - np.eye(2))
    with pytest.raises(StructureError):
        OrbitSpec(generator=Z, rank_one=(v, 2.0))


def test_generator_must_be_algebra():
    with pytest.raises(StructureError):
        OrbitSpec(generator=np.eye(2))


@pytest.mark.parametrize("seed", range(5))
def test_random_sample_on_orbit(seed):
    spec = OrbitSpec.from_rank_one([1.0, 2.0, 0.5])
    assert random_orbit_sample(spec, seed).spectrum_residual() < 1e-12


@pytest.mark.parametrize("v", [[1.0, 1.0], [1.0, 1.0, 1.0], [2.0, 1.0, 0.5], [1, 1, 1, 1]])
def test_project_to_ann_m(v):
    spec = OrbitSpec.from_rank_one(v)
    p = project_to_ann_m(spec, 3)
    assert np.max(np.abs(np.diag(p.value))) < 1e-9
    assert p.spectrum_residual() < 1e-8


def test_project_to_ann_m_deterministic():
    spec = OrbitSpec.from_rank_one([1.0, 1.0, 1.0])
    assert np.array_equal(project_to_ann_m(spec, 11).value, project_to_ann_m(spec, 11).value)


def test_project_to_ann_m_reports_failure(monkeypatch):
    # every traceless orbit meets the zero-diagonal set, so force the solver to stall
    from spincm import orbits

    monkeypatch.setattr(orbits, "_newton_to_ann_m", lambda Z, basis, **kw: (Z, 0.5))
    spec = OrbitSpec.from_rank_one([3.0, 0.1])
    with pytest.raises(OrbitSearchError) as err:
        project_to_ann_m(spec, 0, max_restarts=3)
    assert err.value.best_residual == 0.5


def test_zero_diagonal_reached_for_unbalanced_orbit():
    spec = OrbitSpec.from_rank_one([3.0, 0.1])
    assert np.max(np.abs(np.diag(project_to_ann_m(spec, 0).value))) < 1e-9


def test_minimal_normal_form():
    spec = OrbitSpec.from_rank_one([1.0, 1.0, 1.0])
    nf = minimal_orbit_normal_form(spec)
    assert nf.spectrum_residual() < 1e-14
    with pytest.raises(StructureError):
        minimal_orbit_normal_form(OrbitSpec.from_rank_one([1.0, 2.0, 0.5]))


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_kks_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    Z, X, Y = (random_algebra(3, rng) for _ in range(3))
    assert kks_form(Z, X, Y) == pytest.approx(-kks_form(Z, Y, X), abs=1e-12)
    assert kks_form(Z, X, X) == 0.0


def test_kks_kernel_is_stabilizer(rng):
    Z = random_algebra(3, rng)
    Y = random_algebra(3, rng)
    # Z commutes with itself, so X = Z lies in the kernel
    assert abs(kks_form(Z, Z, Y)) < 1e-12


def test_orbit_generator(rng):
    Z = random_algebra(3, rng)
    X = random_algebra(3, rng)
    X_hat = orbit_generator(Z, commutator(X, Z))
    assert np.max(np.abs(commutator(X_hat, Z) - commutator(X, Z))) < 1e-10
    with pytest.raises(IllConditionedError):
        orbit_generator(Z, Z)


def test_orbit_dimensions():
    assert orbit_dimension(OrbitSpec.from_rank_one([1.0, 1.0, 1.0]).generator) == 4
    rng = np.random.default_rng(0)
    assert orbit_dimension(random_algebra(3, rng)) == 6


def test_casimirs_conjugation_invariant(rng):
    from spincm.lie import adjoint_action, random_unitary

    Z = random_algebra(4, rng)
    g = random_unitary(4, rng)
    assert np.allclose(casimirs(Z, 4), casimirs(adjoint_action(g, Z), 4), atol=1e-12)
    assert casimirs(Z, 2)[0] == pytest.approx(np.sum(spectrum(Z) ** 2))
    with pytest.raises(ValueError):
        casimirs(Z, 1)
