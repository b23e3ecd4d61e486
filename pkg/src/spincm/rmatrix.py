"""Rational and trigonometric classical dynamical r-matrices of sl(n, C).

Tensors live in the fundamental representation as n^2 x n^2 arrays, with
A (x) B stored as ``np.kron(A, B)``. An r-matrix is determined by one
coefficient per root alpha = (i, j) (multiplying E_ij (x) E_ji) and a
coefficient on the Cartan part sum_k x_k (x) x_k.

The operator attached to a tensor contracts its second slot with the trace
pairing, R(X) = Tr_2[(1 (x) X) r], so that E_ij (x) E_ji sends E_ij to
itself. With this convention the rational operator is the connection
dual A_q^*.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRegularError
from .lie import EPS_REG, cartan_basis, elementary

FAMILIES = ("rational", "trigonometric")
TRIG_MIN_ROOT = 1e-8
CDYBE_TOL = 1e-7


def _roots(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _check_base(q, eps):
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise ValueError("base point must be a real vector of length n >= 2")
    d = np.abs(q[:, None] - q[None, :])[~np.eye(q.size, dtype=bool)]
    if d.min() <= eps:
        raise NotRegularError(f"base point is not regular (min root value {d.min():.3e})",
                              min_gap=float(d.min()))
    return q


def sl_basis(n):
    """Basis {E_ij, i != j} followed by the orthonormal Cartan basis."""
    return [elementary(n, i, j) for i, j in _roots(n)] + cartan_basis(n)


def sl_coordinates(M):
    """Coordinates of a traceless M in ``sl_basis``: off-diagonal entries, then Tr(x_k M)."""
    n = M.shape[0]
    off = [M[i, j] for i, j in _roots(n)]
    return np.array(off + [np.trace(x @ M) for x in cartan_basis(n)])


def swap_operator(n):
    """Flip P(u (x) v) = v (x) u on C^n (x) C^n."""
    P = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            P[i * n + j, j * n + i] = 1.0
    return P


@dataclass(frozen=True)
class CasimirTensor:
    n: int
    tensor: np.ndarray = field(repr=False)

    def invariance_residual(self, X):
        """Largest entry of [X (x) 1 + 1 (x) X, Omega]."""
        I = np.eye(self.n)
        D = np.kron(X, I) + np.kron(I, X)
        return float(np.max(np.abs(D @ self.tensor - self.tensor @ D)))


def casimir_tensor(n):
    """Casimir of sl(n) for the trace form: sum_k x_k (x) x_k + sum_alpha E_alpha (x) E_-alpha."""
    T = sum(np.kron(x, x) for x in cartan_basis(n))
    for i, j in _roots(n):
        T = T + np.kron(elementary(n, i, j), elementary(n, j, i))
    return CasimirTensor(n=n, tensor=np.asarray(T, dtype=complex))


def _assemble(n, root_coeffs, cartan_coeff):
    T = np.zeros((n * n, n * n), dtype=complex)
    if cartan_coeff:
        T += cartan_coeff * sum(np.kron(x, x) for x in cartan_basis(n))
    for (i, j), c in root_coeffs.items():
        T += c * np.kron(elementary(n, i, j), elementary(n, j, i))
    return T


def operator_from_tensor(tensor, n):
    """Matrix of X -> Tr_2[(1 (x) X) r] in ``sl_basis`` (columns are images)."""
    r = tensor.reshape(n, n, n, n)  # r[i, j, k, l] = A_ik B_jl
    cols = []
    for X in sl_basis(n):
        image = np.einsum("ijkl,lj->ik", r, X)
        cols.append(sl_coordinates(image))
    return np.array(cols).T


@dataclass(frozen=True)
class DynamicalRMatrix:
    """r(q) = cartan_coeff * sum x_k (x) x_k + sum_alpha root_coeffs[alpha] E_alpha (x) E_-alpha."""

    family: str
    n: int
    base: np.ndarray
    root_coeffs: dict = field(repr=False)
    cartan_coeff: float = 0.0

    @property
    def tensor(self):
        return _assemble(self.n, self.root_coeffs, self.cartan_coeff)

    @property
    def operator(self):
        """Matrix of R(base) in ``sl_basis``, built from the coefficients directly."""
        d = len(_roots(self.n))
        diag = [self.root_coeffs[a] for a in _roots(self.n)] + [self.cartan_coeff] * (self.n - 1)
        out = np.zeros((d + self.n - 1,) * 2, dtype=complex)
        np.fill_diagonal(out, diag)
        return out

    def apply(self, X):
        """R(X) for a traceless n x n matrix X."""
        X = np.asarray(X, dtype=complex)
        out = np.zeros_like(X)
        for (i, j), c in self.root_coeffs.items():
            out[i, j] = c * X[i, j]
        D = np.diag(np.diag(X))
        return out + self.cartan_coeff * D

    def representation_mismatch(self):
        return float(np.max(np.abs(operator_from_tensor(self.tensor, self.n) - self.operator)))


def rational_r(n, q, eps=EPS_REG):
    """r(q) = sum_alpha E_alpha (x) E_-alpha / alpha(q); its operator is A_q^*."""
    q = _check_base(q, eps)
    if q.size != n:
        raise ValueError(f"base point has length {q.size}, expected {n}")
    coeffs = {(i, j): 1.0 / (q[i] - q[j]) for i, j in _roots(n)}
    return DynamicalRMatrix("rational", n, q, coeffs, 0.0)


def trig_r(n, a, argument_sign=1, eps=EPS_REG):
    """r(a) = Omega/2 + 1/2 sum_alpha coth(s alpha(a)/2) E_alpha (x) E_-alpha, s = argument_sign.

    The operator is 1/2 (1 + coth(s alpha(a)/2)) on each root space and
    1/2 on the Cartan subalgebra.
    """
    if argument_sign not in (1, -1):
        raise ValueError("argument_sign must be +1 or -1")
    a = _check_base(a, eps)
    if a.size != n:
        raise ValueError(f"base point has length {a.size}, expected {n}")
    coeffs = {}
    for i, j in _roots(n):
        x = a[i] - a[j]
        if abs(x) < TRIG_MIN_ROOT:
            raise OverflowError(f"coth overflows at root value {x:.3e}")
        coeffs[(i, j)] = 0.5 * (1.0 + 1.0 / np.tanh(argument_sign * x / 2))
    return DynamicalRMatrix("trigonometric", n, a, coeffs, 0.5)


def trig_connection_dual(a, lam):
    """Connection dual for the trigonometric family as a map on root coordinates.

    lam_alpha E_alpha -> 1/2 (1 + coth(-alpha(a)/2)) lam_alpha E_alpha, the
    first-slot contraction of ``trig_r``; kept for comparison with the
    second-slot operator.
    """
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=complex)
    n = a.size
    out = np.zeros_like(lam)
    for i, j in _roots(n):
        x = a[i] - a[j]
        if abs(x) < TRIG_MIN_ROOT:
            raise OverflowError(f"coth overflows at root value {x:.3e}")
        out[i, j] = 0.5 * (1.0 + 1.0 / np.tanh(-x / 2)) * lam[i, j]
    return out


def r21(tensor, n):
    P = swap_operator(n)
    return P @ tensor @ P


def make_r(family, n, q, **kw):
    if family == "rational":
        return rational_r(n, q)
    if family == "trigonometric":
        return trig_r(n, q, **kw)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _legs(tensor, n):
    """Embeddings r^12, r^13, r^23 into End((C^n)^(x)3)."""
    I = np.eye(n)
    r12 = np.kron(tensor, I)
    r23 = np.kron(I, tensor)
    r = tensor.reshape(n, n, n, n)
    r13 = np.einsum("ikjl,mo->imkjol", r, I).reshape(n ** 3, n ** 3)
    return r12, r13, r23


def cdybe_residual(family, n, q, h_step=1e-5, mirrored=False, perturb=None, **kw):
    """Operator norm of Alt(dr) + [r12, r13] + [r12, r23] + [r13, r23].

    Alt(dr) = sum_k x_k^(1) d_k r^23 - x_k^(2) d_k r^13 + x_k^(3) d_k r^12
    over the orthonormal Cartan basis x_k; ``mirrored`` flips every sign of
    Alt(dr). ``perturb = ((i, j), factor)`` rescales one root coefficient.
    """
    if h_step < 1e-12:
        raise ValueError(f"finite-difference step {h_step:g} underflows")
    q = np.asarray(q, dtype=float)

    def tensor_at(point):
        r = make_r(family, n, point, **kw)
        if perturb is None:
            return r.tensor
        root, factor = perturb
        coeffs = dict(r.root_coeffs)
        coeffs[root] = coeffs[root] * factor
        return _assemble(n, coeffs, r.cartan_coeff)

    r12, r13, r23 = _legs(tensor_at(q), n)
    total = (r12 @ r13 - r13 @ r12) + (r12 @ r23 - r23 @ r12) + (r13 @ r23 - r23 @ r13)
    I = np.eye(n)
    sign = -1.0 if mirrored else 1.0
    for x in cartan_basis(n):
        shift = h_step * np.real(np.diag(x))
        dr = (tensor_at(q + shift) - tensor_at(q - shift)) / (2 * h_step)
        d12, d13, d23 = _legs(dr, n)
        alt = np.kron(x, np.eye(n * n)) @ d23 - np.kron(np.kron(I, x), I) @ d13 \
            + np.kron(np.eye(n * n), x) @ d12
        total = total + sign * alt
    return float(np.linalg.norm(total, 2))


def cdybe_check(family, n, q, h_step=1e-5, tol=CDYBE_TOL, **kw):
    """Residual in the standard sign pattern, falling back to the mirrored one.

    Returns ``(residual, convention)`` with convention ``"standard"``,
    ``"mirrored"`` or ``None`` when neither is below ``tol``.
    """
    res = cdybe_residual(family, n, q, h_step, **kw)
    if res <= tol:
        return res, "standard"
    res_m = cdybe_residual(family, n, q, h_step, mirrored=True, **kw)
    if res_m <= tol:
        return res_m, "mirrored"
    return min(res, res_m), None
