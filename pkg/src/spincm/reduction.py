"""Momentum map, mechanical connection and slice coordinates of T*V under conjugation.

A regular phase point (a, alpha) is represented after reduction by a
:class:`ReducedPoint` (q, p, Z): q the strictly decreasing eigenvalues of a,
p the diagonal of the transported momentum, and Z = mu in the frame that
diagonalizes a, with zero diagonal. Z is only defined up to conjugation by
diagonal unitaries; ``gauge_fix_spin`` picks a representative.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRegularError, StructureError
from .lie import (
    EPS_REG,
    adjoint_action,
    as_config,
    check_unitary,
    commutator,
    dagger,
    hermitian_part,
    antihermitian_part,
    build_restricted_root_datum,
)

GAUGE_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """A point (a, alpha) of T*V = V x V."""

    a: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        a = as_config(self.a)
        alpha = as_config(self.alpha)
        if a.shape != alpha.shape:
            raise StructureError(f"position {a.shape} and momentum {alpha.shape} differ in size")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self):
        return self.a.shape[0]

    def energy(self):
        return 0.5 * float(np.real(np.trace(self.alpha @ self.alpha)))


def _check_chamber(q, eps=EPS_REG):
    gaps = -np.diff(q)
    if gaps.size and gaps.min() <= eps:
        raise NotRegularError(
            f"q is not strictly decreasing beyond {eps:g} (min gap {gaps.min():.3e})",
            min_gap=float(gaps.min()),
        )


@dataclass(frozen=True)
class ReducedPoint:
    """A point (q, p, [Z]) of T*C_r x (O // M).

    ``gauge`` records the normalization applied to Z: ``"raw"`` or
    ``"row1-real"`` (see :func:`gauge_fix_spin`).
    """

    q: np.ndarray
    p: np.ndarray
    Z: np.ndarray
    gauge: str = "raw"
    eps_reg: float = field(default=EPS_REG, repr=False, compare=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        Z = np.asarray(self.Z, dtype=complex)
        n = q.shape[0]
        if q.ndim != 1 or p.shape != (n,) or Z.shape != (n, n):
            raise StructureError(f"inconsistent shapes q{q.shape}, p{p.shape}, Z{Z.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p)) and np.all(np.isfinite(Z))):
            raise StructureError("reduced point has non-finite entries")
        _check_chamber(q, self.eps_reg)
        scale = max(1.0, float(np.max(np.abs(Z))))
        if np.max(np.abs(Z + dagger(Z))) > 1e-10 * scale:
            raise StructureError("spin Z is not anti-Hermitian")
        if np.max(np.abs(np.diag(Z))) > 1e-10 * scale:
            raise StructureError("spin Z has a non-zero diagonal")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self):
        return self.q.shape[0]

    def spin_moduli(self):
        """Gauge-invariant |Z_ij|^2 for i < j, row-major."""
        iu = np.triu_indices(self.n, 1)
        return np.abs(self.Z[iu]) ** 2


@dataclass(frozen=True)
class LockedInertia:
    """Locked inertia tensor at ``base`` as a Gram matrix on the complement of its centralizer.

    ``basis`` is the orthonormal basis of that complement in which ``gram``
    is expressed; for diagonal base points it is the restricted-root basis.
    """

    base: np.ndarray
    gram: np.ndarray
    basis: tuple = field(repr=False)

    def __call__(self, X, Y):
        return float(np.real(np.trace(commutator(X, self.base) @ commutator(Y, self.base))))


def momentum_map(x):
    """mu(a, alpha) = [a, alpha]."""
    return commutator(x.a, x.alpha)


def _eigen_frame(a, eps=EPS_REG):
    """Unitary U with det 1 and q decreasing such that a = U diag(q) U^+."""
    a = as_config(a)
    w, U = np.linalg.eigh(hermitian_part(a))
    w, U = w[::-1], U[:, ::-1].copy()
    gaps = -np.diff(w)
    if gaps.size and gaps.min() <= eps:
        raise NotRegularError(
            f"configuration is not regular (min eigenvalue gap {gaps.min():.3e})",
            min_gap=float(gaps.min()),
        )
    U[:, 0] *= np.conj(np.linalg.det(U))
    return U, w


def diagonalize_to_chamber(a, eps=EPS_REG):
    """Return (g, q) with a = g diag(q) g^+, g in SU(n), q strictly decreasing."""
    return _eigen_frame(a, eps)


def _is_diagonal(a):
    off = a - np.diag(np.diag(a))
    return np.max(np.abs(off)) <= 1e-14 * max(1.0, float(np.max(np.abs(a))))


def _complement_basis(a, datum):
    """Orthonormal basis of the orthocomplement of the centralizer of a."""
    flat = [E for pair in datum.E for E in pair]
    if _is_diagonal(a):
        d = np.real(np.diag(a))
        gaps = np.abs(d[:, None] - d[None, :])[np.triu_indices(len(d), 1)]
        if gaps.min() <= EPS_REG:
            raise NotRegularError(
                f"configuration is not regular (min eigenvalue gap {gaps.min():.3e})",
                min_gap=float(gaps.min()),
            )
        return tuple(flat)
    U, _ = _eigen_frame(a)
    return tuple(U @ E @ dagger(U) for E in flat)


def locked_inertia(q, datum=None):
    """Gram matrix of (X, Y) -> <[X, q], [Y, q]>_V on the complement of the centralizer of q."""
    q = as_config(q)
    datum = datum or build_restricted_root_datum(q.shape[0])
    basis = _complement_basis(q, datum)
    fields = [commutator(X, q) for X in basis]
    gram = np.array([[np.real(np.trace(u @ v)) for v in fields] for u in fields])
    return LockedInertia(base=q, gram=0.5 * (gram + gram.T), basis=basis)


def _chamber_denominators(q, eps=EPS_REG):
    q = np.asarray(q, dtype=float)
    d = q[:, None] - q[None, :]
    off = ~np.eye(len(q), dtype=bool)
    if np.min(np.abs(d[off])) < eps:
        raise NotRegularError(
            f"eigenvalues closer than {eps:g} (min gap {np.min(np.abs(d[off])):.3e})",
            min_gap=float(np.min(np.abs(d[off]))),
        )
    np.fill_diagonal(d, 1.0)
    return d


def connection_dual(q, Z, eps=EPS_REG):
    """A_q^*(Z)_ij = Z_ij / (q_i - q_j) off the diagonal, zero on it."""
    Z = np.asarray(Z, dtype=complex)
    if np.max(np.abs(np.diag(Z))) > 1e-10 * max(1.0, float(np.max(np.abs(Z)))):
        raise StructureError("connection_dual expects a zero-diagonal argument")
    out = Z / _chamber_denominators(q, eps)
    np.fill_diagonal(out, 0.0)
    return out


def connection_dual_at(a, lam):
    """A_a^*(lam) at an arbitrary regular a, by equivariance from the chamber."""
    U, q = _eigen_frame(a)
    lam_t = dagger(U) @ lam @ U
    np.fill_diagonal(lam_t, 0.0)
    return U @ connection_dual(q, lam_t) @ dagger(U)


def connection_form(a, v, datum=None):
    """Mechanical connection A_a(v).

    Solves the locked-inertia system I_a(X, Y_k) = <v, [Y_k, a]>_V for X in
    the complement of the centralizer of a, so that [X, a] is the vertical
    part of v and A vanishes on vectors orthogonal to the orbit.
    """
    a = as_config(a)
    inertia = locked_inertia(a, datum)
    rhs = np.array([np.real(np.trace(v @ commutator(Y, a))) for Y in inertia.basis])
    coeffs = np.linalg.solve(inertia.gram, rhs)
    return sum(c * Y for c, Y in zip(coeffs, inertia.basis))


def gauge_fix_spin(Z, tol=GAUGE_TOL):
    """Conjugate Z by a diagonal unitary so that its first row is real and non-negative.

    Returns ``(Z_fixed, phases)`` with Z_fixed = D^+ Z D, D = diag(phases).
    Entries of the first row with modulus at most ``tol`` keep phase 1.
    """
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[0]
    phases = np.ones(n, dtype=complex)
    row = Z[0, 1:]
    big = np.abs(row) > tol
    phases[1:][big] = np.conj(row[big]) / np.abs(row[big])
    fixed = np.conj(phases)[:, None] * Z * phases[None, :]
    fixed[0, 1:][big] = np.abs(row[big])
    fixed[1:, 0][big] = -np.abs(row[big])
    return fixed, phases


def project_point(x, eps=EPS_REG):
    """Reduce a regular phase point to chamber coordinates (gauge-fixed)."""
    g, q = _eigen_frame(x.a, eps)
    alpha_t = hermitian_part(dagger(g) @ x.alpha @ g)
    p = np.real(np.diag(alpha_t)).copy()
    Z = (q[:, None] - q[None, :]) * alpha_t
    Z = antihermitian_part(Z)
    np.fill_diagonal(Z, 0.0)
    Z, _ = gauge_fix_spin(Z)
    return ReducedPoint(q=q, p=p, Z=Z, gauge="row1-real", eps_reg=eps)


def embed_reduced(r):
    """Section of the orbit projection: (diag(q), diag(p) + A_q^*(Z))."""
    return PhasePoint(a=np.diag(r.q).astype(complex), alpha=lax_matrix(r))


def lax_matrix(r):
    """L = diag(p) + A_q^*(Z)."""
    L = np.diag(r.p).astype(complex) + connection_dual(r.q, r.Z, r.eps_reg)
    return hermitian_part(L)


def reduced_hamiltonian(r):
    """1/2 sum p_i^2 + sum_{i>j} |Z_ij|^2 / (q_i - q_j)^2."""
    d = _chamber_denominators(r.q, r.eps_reg)
    iu = np.triu_indices(r.n, 1)
    return 0.5 * float(r.p @ r.p) + float(np.sum(np.abs(r.Z[iu]) ** 2 / d[iu] ** 2))


def polar_hamiltonian(r, datum):
    """Reduced Hamiltonian evaluated through restricted-root coordinates.

    Z is expanded as sum z_lam^k E_lam^k; the potential is
    1/2 sum_lam sum_k (z_lam^k)^2 / lam(q)^2.
    """
    P = np.diag(r.p)
    slice_coords = np.array([np.real(np.trace(P @ B0)) for B0 in datum.slice_basis])
    kinetic = 0.5 * float(slice_coords @ slice_coords)
    potential = 0.0
    for k, pair in enumerate(datum.E):
        lam_q = datum.root_value(k, r.q)
        for E in pair:
            z = -np.real(np.trace(r.Z @ E))
            potential += 0.5 * z * z / lam_q ** 2
    return kinetic + potential


def rotate(x, g):
    """Diagonal conjugation action of a unitary g on a phase point."""
    check_unitary(g)
    return PhasePoint(a=adjoint_action(g, x.a), alpha=adjoint_action(g, x.alpha))
