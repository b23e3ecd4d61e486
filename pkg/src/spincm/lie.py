"""The symmetric pair (su(n), Hermitian matrices) as plain complex arrays.

Elements of the Lie algebra g = su(n) are traceless anti-Hermitian n x n
arrays; elements of the configuration space V are Hermitian n x n arrays.
Both are ordinary ``numpy`` arrays of dtype complex; the ``as_algebra`` and
``as_config`` helpers validate them at module boundaries.

Pairings
--------
* on V:  <a, b>_V = Tr(ab)        (real, positive definite)
* on g:  <X, Y>_g = -Tr(XY)       (real, positive definite)
* momentum values (elements of g*, stored as matrices in g) pair with
  algebra elements through ``dual_pairing(lam, X) = Tr(lam X)``; this is the
  pairing for which ``[a, alpha]`` is the momentum map of conjugation.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, StructureError

STRUCT_TOL = 1e-12
UNITARY_TOL = 1e-10
EPS_REG = 1e-8


def _square(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise StructureError(f"{name} has non-finite entries")
    return M


def dagger(M):
    return np.conjugate(M).T


def _scale(M):
    return max(1.0, float(np.max(np.abs(M))))


def is_hermitian(M, tol=STRUCT_TOL):
    M = np.asarray(M)
    return np.max(np.abs(M - dagger(M))) <= tol * _scale(M)


def is_antihermitian(M, tol=STRUCT_TOL):
    M = np.asarray(M)
    return np.max(np.abs(M + dagger(M))) <= tol * _scale(M)


def as_config(M, tol=STRUCT_TOL):
    """Validate a Hermitian matrix (element of V) and return it as a complex array."""
    M = _square(M, "configuration element")
    if not is_hermitian(M, tol):
        raise StructureError("configuration element is not Hermitian")
    return M


def as_algebra(M, tol=STRUCT_TOL):
    """Validate a traceless anti-Hermitian matrix (element of su(n))."""
    M = _square(M, "algebra element")
    if not is_antihermitian(M, tol):
        raise StructureError("algebra element is not anti-Hermitian")
    if abs(np.trace(M)) > tol * _scale(M) * M.shape[0]:
        raise StructureError("algebra element is not traceless")
    return M


def hermitian_part(M):
    return 0.5 * (M + dagger(M))


def antihermitian_part(M):
    return 0.5 * (M - dagger(M))


def commutator(X, Y):
    """Return XY - YX."""
    X = _square(X, "X")
    Y = _square(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return X @ Y - Y @ X


def invariant_pairing(X, Y, space):
    """Ad-invariant inner product on V (``space='config'``) or g (``'algebra'``).

    The config pairing is Tr(XY); the algebra pairing is -Tr(XY), which is
    positive definite on su(n). Arguments that do not belong to the named
    space raise ``StructureError``.
    """
    X = _square(X, "X")
    Y = _square(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    if space == "config":
        if not (is_hermitian(X) and is_hermitian(Y)):
            raise StructureError("config pairing needs two Hermitian matrices")
        return float(np.real(np.trace(X @ Y)))
    if space == "algebra":
        if not (is_antihermitian(X) and is_antihermitian(Y)):
            raise StructureError("algebra pairing needs two anti-Hermitian matrices")
        return float(-np.real(np.trace(X @ Y)))
    raise ValueError(f"unknown space {space!r}; expected 'config' or 'algebra'")


def dual_pairing(lam, X):
    """Pair a momentum value lam (a matrix in g) with an algebra element X."""
    return float(np.real(np.trace(np.asarray(lam) @ np.asarray(X))))


def matrix_exp(X):
    """Exponential of an anti-Hermitian matrix.

    Uses the spectral decomposition of the Hermitian matrix iX, so the
    result is unitary to machine precision; traceless input gives unit
    determinant.
    """
    X = _square(X, "X")
    if not is_antihermitian(X, 1e-10):
        raise StructureError("matrix_exp expects an anti-Hermitian matrix")
    w, U = np.linalg.eigh(hermitian_part(1j * X))
    return (U * np.exp(-1j * w)) @ dagger(U)


def check_unitary(g, tol=UNITARY_TOL):
    g = _square(g, "g")
    err = np.max(np.abs(g @ dagger(g) - np.eye(g.shape[0])))
    if err > tol:
        raise StructureError(f"group element is not unitary (|gg^+ - I| = {err:.3e})")
    return g


def adjoint_action(g, X):
    """Conjugation X -> g X g^+ by a unitary g."""
    g = check_unitary(g)
    X = _square(X, "X")
    if g.shape != X.shape:
        raise DimensionError(f"dimension mismatch: {g.shape} vs {X.shape}")
    return g @ X @ dagger(g)


def fundamental_field(X, a):
    """Infinitesimal generator of conjugation: d/dt exp(tX) a exp(-tX) at t=0."""
    return commutator(X, a)


def elementary(n, i, j):
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1.0
    return E


def cartan_basis(n):
    """Orthonormal (under Tr) basis of the real traceless diagonal matrices."""
    basis = []
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        basis.append(np.diag(d / np.sqrt(k * (k + 1))).astype(complex))
    return basis


def su_basis(n):
    """Orthonormal basis of su(n) under <X, Y>_g = -Tr(XY).

    Off-diagonal elements come first in the order of ``build_restricted_root_datum``,
    followed by i times the Cartan basis.
    """
    datum = build_restricted_root_datum(n)
    return [E for pair in datum.E for E in pair] + list(datum.centralizer_basis)


def algebra_coordinates(X, basis):
    """Real coordinates of X in an orthonormal basis of su(n)."""
    return np.array([-np.real(np.trace(X @ b)) for b in basis])


@dataclass(frozen=True)
class RootDatum:
    """Roots alpha_ij(q) = q_i - q_j of sl(n, C) with root vectors E_ij.

    Under the trace pairing Tr(E_ij E_ji) = 1, so the root vectors need no
    rescaling (``pairing_normalization`` is 1).
    """

    n: int
    roots: tuple
    root_vectors: dict = field(repr=False)
    pairing_normalization: float = 1.0

    def value(self, root, q):
        i, j = root
        return q[i] - q[j]


def build_root_datum(n):
    if n < 2:
        raise ValueError(f"root data need n >= 2, got {n}")
    roots = tuple((i, j) for i in range(n) for j in range(n) if i != j)
    vectors = {r: elementary(n, *r) for r in roots}
    return RootDatum(n=n, roots=roots, root_vectors=vectors)


@dataclass(frozen=True)
class RestrictedRootDatum:
    """Restricted roots of (su(n), V) with respect to the diagonal section.

    ``E[k]`` and ``B[k]`` hold the two basis pairs of the k-th positive root
    ``positive_roots[k] = (i, j)``, i < j, normalized so that
    ad(q) E = (q_i - q_j) B and ad(q) B = (q_i - q_j) E for real diagonal q.
    """

    n: int
    positive_roots: tuple
    E: tuple = field(repr=False)
    B: tuple = field(repr=False)
    slice_basis: tuple = field(repr=False)
    centralizer_basis: tuple = field(repr=False)

    def root_value(self, k, q):
        i, j = self.positive_roots[k]
        return q[i] - q[j]


def build_restricted_root_datum(n):
    if n < 2:
        raise ValueError(f"restricted root data need n >= 2, got {n}")
    s = 1.0 / np.sqrt(2.0)
    roots, Es, Bs = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            Eij, Eji = elementary(n, i, j), elementary(n, j, i)
            roots.append((i, j))
            Es.append((s * (Eij - Eji), s * 1j * (Eij + Eji)))
            Bs.append((s * (Eij + Eji), s * 1j * (Eij - Eji)))
    slice_basis = tuple(elementary(n, j, j) for j in range(n))
    centralizer = tuple(1j * H for H in cartan_basis(n))
    return RestrictedRootDatum(
        n=n,
        positive_roots=tuple(roots),
        E=tuple(Es),
        B=tuple(Bs),
        slice_basis=slice_basis,
        centralizer_basis=centralizer,
    )


def random_hermitian(n, rng, scale=1.0):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * hermitian_part(M)


def random_algebra(n, rng, scale=1.0):
    """Gaussian element of su(n): independent N(0, scale^2) coordinates in an orthonormal basis."""
    basis = su_basis(n)
    coeffs = scale * rng.normal(size=len(basis))
    return sum(c * b for c, b in zip(coeffs, basis))


def random_unitary(n, rng, scale=1.0):
    return matrix_exp(random_algebra(n, rng, scale))


def random_spin(n, rng, scale=1.0):
    """Random anti-Hermitian matrix with zero diagonal (element of m-perp)."""
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Z = scale * antihermitian_part(M)
    np.fill_diagonal(Z, 0.0)
    return Z
