"""Adjoint orbits of SU(n) in su(n) (identified with coadjoint orbits).

An orbit is described by an :class:`OrbitSpec`; points on it carry their
spec so that membership can be certified by comparing spectra.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import OrbitSearchError, StructureError, IllConditionedError
from .lie import (
    adjoint_action,
    as_algebra,
    commutator,
    dagger,
    matrix_exp,
    random_algebra,
    su_basis,
)

SPECTRUM_TOL = 1e-8


def spectrum(Z):
    """Eigenvalues of the anti-Hermitian Z as the sorted real spectrum of -iZ."""
    H = -1j * np.asarray(Z)
    return np.linalg.eigvalsh(0.5 * (H + dagger(H)))


@dataclass(frozen=True)
class OrbitSpec:
    """Orbit through ``generator``; ``rank_one = (v, c)`` means generator = i(vv^+ - cI)."""

    generator: np.ndarray
    rank_one: Optional[tuple] = None

    def __post_init__(self):
        Z0 = as_algebra(self.generator)
        object.__setattr__(self, "generator", Z0)
        if self.rank_one is not None:
            v, c = self.rank_one
            v = np.asarray(v, dtype=complex)
            n = Z0.shape[0]
            if v.shape != (n,):
                raise StructureError(f"rank-one vector has shape {v.shape}, expected ({n},)")
            if not c > 0:
                raise StructureError("rank-one constant c must be positive")
            rebuilt = 1j * (np.outer(v, v.conj()) - c * np.eye(n))
            if np.max(np.abs(rebuilt - Z0)) > 1e-12 * max(1.0, np.max(np.abs(Z0))):
                raise StructureError("rank-one data do not reproduce the generator")
            object.__setattr__(self, "rank_one", (v, float(c)))

    @classmethod
    def from_rank_one(cls, v):
        v = np.asarray(v, dtype=complex)
        n = v.shape[0]
        c = float(np.vdot(v, v).real) / n
        Z0 = 1j * (np.outer(v, v.conj()) - c * np.eye(n))
        return cls(generator=Z0, rank_one=(v, c))

    @property
    def n(self):
        return self.generator.shape[0]

    @property
    def spectrum(self):
        return spectrum(self.generator)

    def is_minimal_balanced(self, tol=1e-10):
        """True for rank-one data with |v_i|^2 = c for every i."""
        if self.rank_one is None:
            return False
        v, c = self.rank_one
        return bool(np.max(np.abs(np.abs(v) ** 2 - c)) <= tol * max(1.0, c))


@dataclass(frozen=True)
class OrbitPoint:
    value: np.ndarray
    spec: OrbitSpec

    def spectrum_residual(self):
        return float(np.max(np.abs(spectrum(self.value) - self.spec.spectrum)))

    def certify(self, tol=SPECTRUM_TOL):
        res = self.spectrum_residual()
        if res > tol:
            raise StructureError(f"point is off the orbit (spectrum residual {res:.3e})")
        return self


def orbit_point(spec, g):
    return OrbitPoint(value=adjoint_action(g, spec.generator), spec=spec)


def random_orbit_sample(spec, seed):
    """Point Ad(exp xi) Z0 with Gaussian xi; not Haar distributed."""
    rng = np.random.default_rng(seed)
    g = matrix_exp(random_algebra(spec.n, rng))
    return orbit_point(spec, g)


def _diag_residual(Z):
    # diagonal of an anti-Hermitian matrix is purely imaginary
    return np.imag(np.diag(Z))


POLISH_TARGET = 1e-28


def _newton_to_ann_m(Z, basis, max_iter=100, target=POLISH_TARGET):
    """Gauss-Newton on r(xi) = Im diag(Ad(exp xi) Z), recentred at every step.

    Iterates until the squared residual drops below ``target`` or stops
    decreasing, so converged points are polished down to roundoff.
    """
    r = _diag_residual(Z)
    f = float(r @ r)
    for _ in range(max_iter):
        if f <= target:
            break
        J = np.array([_diag_residual(commutator(b, Z)) for b in basis]).T
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        norm = np.linalg.norm(step)
        if norm > 1.0:
            step /= norm
        t = 1.0
        while t > 1e-6:
            xi = t * sum(c * b for c, b in zip(step, basis))
            Z_new = adjoint_action(matrix_exp(xi), Z)
            r_new = _diag_residual(Z_new)
            f_new = float(r_new @ r_new)
            if f_new < f:
                break
            t *= 0.5
        else:
            break
        Z, r, f = Z_new, r_new, f_new
    return Z, f


def project_to_ann_m(spec, seed, max_restarts=50, tol=1e-18):
    """Find a point of the orbit whose diagonal vanishes.

    Starts from ``random_orbit_sample(spec, seed)`` and runs a Gauss-Newton
    descent of |diag(Ad(exp xi) Z)|^2; further restarts use seeds derived
    from ``seed``. Raises :class:`OrbitSearchError` with the best squared
    residual when every restart fails.
    """
    basis = su_basis(spec.n)
    seeds = np.random.SeedSequence(seed).spawn(max_restarts)
    best = np.inf
    for k in range(max_restarts):
        start = random_orbit_sample(spec, seed if k == 0 else seeds[k]).value
        Z, f = _newton_to_ann_m(start, basis)
        best = min(best, f)
        if f <= tol:
            Z = 0.5 * (Z - dagger(Z))
            np.fill_diagonal(Z, 0.0)
            return OrbitPoint(value=Z, spec=spec)
    raise OrbitSearchError(
        f"no zero-diagonal point found after {max_restarts} restarts "
        f"(best squared residual {best:.3e})",
        best_residual=best,
    )


def minimal_orbit_normal_form(spec):
    """Normal form i c (J - I) of a balanced rank-one orbit, J the all-ones matrix."""
    if spec.rank_one is None:
        raise StructureError("normal form needs rank-one orbit data")
    if not spec.is_minimal_balanced():
        raise StructureError("normal form needs |v_i|^2 = c for every i")
    _, c = spec.rank_one
    n = spec.n
    Z = 1j * c * (np.ones((n, n)) - np.eye(n))
    return OrbitPoint(value=Z, spec=spec)


def kks_form(Z, X, Y):
    """<Z, [X, Y]>_g for tangent vectors ad(X)Z, ad(Y)Z presented by their generators."""
    Z = np.asarray(getattr(Z, "value", Z))
    return float(-np.real(np.trace(Z @ commutator(X, Y))))


def orbit_generator(Z, dZ, tol=1e-7):
    """Least-squares X in su(n) with [X, Z] = dZ.

    Raises :class:`IllConditionedError` if dZ is not (numerically) tangent
    to the orbit through Z.
    """
    Z = np.asarray(Z)
    basis = su_basis(Z.shape[0])
    cols = [commutator(b, Z) for b in basis]
    A = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cols]).T
    rhs = np.concatenate([np.real(dZ).ravel(), np.imag(dZ).ravel()])
    coeffs = np.linalg.lstsq(A, rhs, rcond=1e-12)[0]
    X = sum(c * b for c, b in zip(coeffs, basis))
    err = np.max(np.abs(commutator(X, Z) - dZ))
    if err > tol * max(1.0, np.max(np.abs(dZ))):
        raise IllConditionedError(f"vector is not tangent to the orbit (residual {err:.3e})")
    return X


def orbit_dimension(Z, tol=1e-9):
    """Rank of X -> [X, Z] on su(n)."""
    Z = np.asarray(Z)
    basis = su_basis(Z.shape[0])
    A = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()])
                  for c in (commutator(b, Z) for b in basis)]).T
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def casimirs(Z, k_max):
    """Real invariants Re(i^-k Tr Z^k) for k = 2..k_max (= Tr H^k for Z = iH)."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    Z = np.asarray(getattr(Z, "value", Z))
    out = []
    P = Z @ Z
    for k in range(2, k_max + 1):
        if k > 2:
            P = P @ Z
        out.append(float(np.real((1j) ** (-k) * np.trace(P))))
    return out
