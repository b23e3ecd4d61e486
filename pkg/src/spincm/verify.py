"""Pointwise numerical checks of the geometric identities behind the reduction.

Everything here compares bilinear forms evaluated on explicit tangent
vectors; derivatives that are not available in closed form are taken by
central differences.

Momentum values pair with algebra elements through ``dual_pairing``
(Tr(lam X)), the pairing for which [a, alpha] is the momentum map. The
orbit form entering the reduced symplectic structure is therefore
Tr(Z [X, Y]) = -kks_form(Z, X, Y).
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm_frechet

from .errors import IllConditionedError, StructureError
from .lie import (
    EPS_REG,
    adjoint_action,
    build_restricted_root_datum,
    commutator,
    dagger,
    dual_pairing,
    matrix_exp,
    random_algebra,
    random_hermitian,
    random_spin,
    random_unitary,
    su_basis,
)
from .orbits import kks_form, orbit_generator
from .reduction import (
    PhasePoint,
    connection_dual,
    connection_dual_at,
    connection_form,
    locked_inertia,
    momentum_map,
    project_point,
)

FD_STEP = 1e-5
ALGEBRAIC_TOL = 1e-9
FD_TOL = 1e-6


@dataclass(frozen=True)
class WeinsteinChartPoint:
    """Chart point: slice coordinate s, group coordinate xi (g = exp xi), covector eta, spin lam."""

    s: np.ndarray
    g_param: np.ndarray
    eta: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        gaps = -np.diff(s)
        if gaps.size and gaps.min() <= EPS_REG:
            raise StructureError("slice coordinate s must be strictly decreasing")
        lam = np.asarray(self.lam, dtype=complex)
        if np.max(np.abs(np.diag(lam))) > 1e-10:
            raise StructureError("lam must have zero diagonal")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "g_param", np.asarray(self.g_param, dtype=complex))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class ChartTangent:
    ds: np.ndarray
    deta: np.ndarray
    dxi: np.ndarray
    dlam: np.ndarray

    @property
    def q_part(self):
        return (self.ds, self.dxi)


def _shift(w, t, eps):
    return WeinsteinChartPoint(
        s=w.s + eps * t.ds,
        g_param=w.g_param + eps * t.dxi,
        eta=w.eta + eps * t.deta,
        lam=w.lam + eps * t.dlam,
    )


def weinstein_map(w):
    """(q, eta, lam) -> (q, horizontal covector + A_q^*(lam)) in the moving frame g = exp(xi)."""
    g = matrix_exp(w.g_param)
    S = np.diag(w.s).astype(complex)
    inner = np.diag(w.eta).astype(complex) + connection_dual(w.s, w.lam)
    return PhasePoint(a=g @ S @ dagger(g), alpha=g @ inner @ dagger(g))


def chart_position(s, xi):
    g = matrix_exp(xi)
    return g @ np.diag(s).astype(complex) @ dagger(g)


def chart_velocity(s, xi, ds, dxi):
    """Exact derivative of exp(xi) diag(s) exp(xi)^+ along (ds, dxi)."""
    g, dg = expm_frechet(np.asarray(xi, dtype=complex), np.asarray(dxi, dtype=complex))
    S = np.diag(s).astype(complex)
    dS = np.diag(ds).astype(complex)
    return dg @ S @ dagger(g) + g @ dS @ dagger(g) + g @ S @ dagger(dg)


def _transported(lam, xi, dlam, dxi):
    """lam(t) = Ad(exp(xi + t dxi))(lam + t dlam) and its t-derivative at 0."""
    g, dg = expm_frechet(np.asarray(xi, dtype=complex), np.asarray(dxi, dtype=complex))
    value = g @ lam @ dagger(g)
    deriv = dg @ lam @ dagger(g) + g @ dlam @ dagger(g) + g @ lam @ dagger(dg)
    return value, deriv


def curvature_fd(s, xi, v1, v2, h=FD_STEP):
    """Curvature dA - 1/2 [A, A]^ of the mechanical connection at exp(xi) diag(s).

    ``v1`` and ``v2`` are (ds, dxi) pairs. They are extended as
    constant-coefficient fields in the chart (s, xi), whose brackets vanish,
    so dA(v1, v2) = v1(A(v2)) - v2(A(v1)) with the directional derivatives
    taken by central differences of step h.
    """
    if h < 1e-12:
        raise ValueError(f"finite-difference step {h:g} underflows")
    s = np.asarray(s, dtype=float)
    xi = np.asarray(xi, dtype=complex)
    ds1, dxi1 = (np.asarray(c) for c in v1)
    ds2, dxi2 = (np.asarray(c) for c in v2)

    def A(s_, xi_, ds, dxi):
        return connection_form(chart_position(s_, xi_), chart_velocity(s_, xi_, ds, dxi))

    def directional(ds_dir, dxi_dir, ds, dxi):
        plus = A(s + h * ds_dir, xi + h * dxi_dir, ds, dxi)
        minus = A(s - h * ds_dir, xi - h * dxi_dir, ds, dxi)
        return (plus - minus) / (2 * h)

    dA = directional(ds1, dxi1, ds2, dxi2) - directional(ds2, dxi2, ds1, dxi1)
    Z1 = A(s, xi, ds1, dxi1)
    Z2 = A(s, xi, ds2, dxi2)
    return dA - commutator(Z1, Z2)


def canonical_form(u1, u2):
    """Omega((a1, alpha1), (a2, alpha2)) = Tr(alpha2 a1) - Tr(alpha1 a2)."""
    (a1, al1), (a2, al2) = u1, u2
    return float(np.real(np.trace(al2 @ a1) - np.trace(al1 @ a2)))


@dataclass(frozen=True)
class FormCheck:
    lhs: float
    rhs: float

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)


def _pushforward(w, t, h):
    plus = weinstein_map(_shift(w, t, h))
    minus = weinstein_map(_shift(w, t, -h))
    return (plus.a - minus.a) / (2 * h), (plus.alpha - minus.alpha) / (2 * h)


def verify_weinstein_form(w, t1, t2, h=FD_STEP):
    """Compare the pulled-back canonical form with the canonical quotient form minus dB.

    lhs = (psi^* Omega)(t1, t2) by central differences through ``weinstein_map``;
    rhs = <deta2, ds1> - <deta1, ds2> - dB(t1, t2) with
    dB = <lam'_1, Z_2> - <lam'_2, Z_1> + <lam, Curv(q'_1, q'_2)> + <lam, [Z_1, Z_2]>,
    Z_i = A(q'_i) and lam'_i the derivative of the transported spin.
    """
    lhs = canonical_form(_pushforward(w, t1, h), _pushforward(w, t2, h))

    a = chart_position(w.s, w.g_param)
    q1 = chart_velocity(w.s, w.g_param, t1.ds, t1.dxi)
    q2 = chart_velocity(w.s, w.g_param, t2.ds, t2.dxi)
    Z1 = connection_form(a, q1)
    Z2 = connection_form(a, q2)
    lam, dlam1 = _transported(w.lam, w.g_param, t1.dlam, t1.dxi)
    _, dlam2 = _transported(w.lam, w.g_param, t2.dlam, t2.dxi)
    curv = curvature_fd(w.s, w.g_param, t1.q_part, t2.q_part, h)
    dB = (dual_pairing(dlam1, Z2) - dual_pairing(dlam2, Z1)
          + dual_pairing(lam, curv) + dual_pairing(lam, commutator(Z1, Z2)))
    base = float(t2.deta @ t1.ds - t1.deta @ t2.ds)
    return FormCheck(lhs=lhs, rhs=base - dB)


def orbit_form(Z, dZ1, dZ2, tol=1e-7):
    """Orbit symplectic form at Z on tangent vectors dZ_i = [X_i, Z]: Tr(Z [X_1, X_2])."""
    X1 = orbit_generator(Z, dZ1, tol)
    X2 = orbit_generator(Z, dZ2, tol)
    return -kks_form(Z, X1, X2)


def momentum_derivative(x, u):
    da, dalpha = u
    return commutator(da, x.alpha) + commutator(x.a, dalpha)


def _central(x, u, h):
    da, dalpha = u
    plus = project_point(PhasePoint(a=x.a + h * da, alpha=x.alpha + h * dalpha))
    minus = project_point(PhasePoint(a=x.a - h * da, alpha=x.alpha - h * dalpha))
    return ((plus.q - minus.q) / (2 * h), (plus.p - minus.p) / (2 * h),
            (plus.Z - minus.Z) / (2 * h))


def _reduced_derivative(x, u, h):
    """Derivative of ``project_point`` along u: central differences at h and h/2, Richardson-combined."""
    coarse = _central(x, u, h)
    fine = _central(x, u, h / 2)
    return tuple((4 * f - c) / 3 for f, c in zip(fine, coarse))


def verify_reduced_form(x, u1, u2, h=FD_STEP):
    """Check that the reduced form pulls back to the constrained form.

    lhs = Omega(u1, u2) - Omega^O(dmu u1, dmu u2);
    rhs = <dp2, dq1> - <dp1, dq2> - Omega^O_Z(dZ1, dZ2),
    where (dq, dp, dZ) is the derivative of ``project_point`` along u.
    """
    mu = momentum_map(x)
    lhs = canonical_form(u1, u2) - orbit_form(mu, momentum_derivative(x, u1),
                                               momentum_derivative(x, u2))
    r = project_point(x)
    dq1, dp1, dZ1 = _reduced_derivative(x, u1, h)
    dq2, dp2, dZ2 = _reduced_derivative(x, u2, h)
    # finite-difference spin velocities are tangent only up to O(h^2)
    rhs = float(dp2 @ dq1 - dp1 @ dq2) - orbit_form(r.Z, dZ1, dZ2, tol=1e-4)
    return FormCheck(lhs=lhs, rhs=rhs)


def gauge_tangent(x, X):
    """Fundamental vector field of X at x."""
    return commutator(X, x.a), commutator(X, x.alpha)


def free_flow_tangent(x):
    return x.alpha.copy(), np.zeros_like(x.alpha)


def constrained_tangent(x, rng):
    """Random vector tangent to mu^{-1}(O) at x, O the orbit through mu(x).

    Draws da and a generator Y, corrects Y so that [Y, mu] - [da, alpha]
    has zero diagonal in the eigenframe of a, then solves [a, dalpha] for the
    off-diagonal part of dalpha; the diagonal part is random.
    """
    n = x.n
    mu = momentum_map(x)
    da = random_hermitian(n, rng)
    Y = random_algebra(n, rng)
    w, U = np.linalg.eigh(x.a)
    basis = su_basis(n)
    frame = lambda M: dagger(U) @ M @ U  # noqa: E731
    R = frame(commutator(Y, mu) - commutator(da, x.alpha))
    J = np.array([np.imag(np.diag(frame(commutator(b, mu)))) for b in basis]).T
    c = np.linalg.lstsq(J, -np.imag(np.diag(R)), rcond=None)[0]
    Y = Y + sum(ci * b for ci, b in zip(c, basis))
    R = frame(commutator(Y, mu) - commutator(da, x.alpha))
    d = w[:, None] - w[None, :]
    np.fill_diagonal(d, 1.0)
    dal = R / d
    np.fill_diagonal(dal, rng.normal(size=n))
    dal = 0.5 * (dal + dagger(dal))
    return da, U @ dal @ dagger(U)


def random_regular_config(n, rng, min_gap=0.1):
    while True:
        a = random_hermitian(n, rng)
        w = np.linalg.eigvalsh(a)
        if np.min(np.diff(w)) >= min_gap:
            return a


def random_chart(n, rng, min_gap=0.3, xi_scale=0.5):
    while True:
        s = np.sort(rng.normal(scale=1.5, size=n))[::-1]
        if np.min(-np.diff(s)) >= min_gap:
            break
    xi = random_spin(n, rng, xi_scale)
    return WeinsteinChartPoint(s=s, g_param=xi, eta=rng.normal(size=n), lam=random_spin(n, rng))


def random_chart_tangent(n, rng, vertical=True, horizontal=True, spin=True):
    zero_n = np.zeros(n)
    zero_nn = np.zeros((n, n), dtype=complex)
    return ChartTangent(
        ds=rng.normal(size=n) if horizontal else zero_n,
        deta=rng.normal(size=n) if horizontal else zero_n,
        dxi=random_spin(n, rng) if vertical else zero_nn,
        dlam=random_spin(n, rng) if spin else zero_nn,
    )


@dataclass
class ConnectionReport:
    n: int
    samples: int
    residuals: dict = field(default_factory=dict)
    min_inertia_eigenvalue: float = np.inf
    tol: float = ALGEBRAIC_TOL

    @property
    def passed(self):
        return all(v <= self.tol for v in self.residuals.values())


def check_connection_identities(n, seed, samples, tol=ALGEBRAIC_TOL):
    """Largest residuals over random regular points of the connection identities.

    * ``zeta_A_zeta``: zeta(A(zeta_X)) = zeta_X
    * ``mu_Astar``: [q, A_q^*(lam)] = lam at chamber points
    * ``mu_Astar_general``: the same at arbitrary regular points
    * ``Astar_mu``: A_q^*(mu_q(v)) = v for vertical v
    * ``equivariance``: A_{g.a}(g.v) = Ad(g) A_a(v)
    * ``inertia_posdef``: max(0, -smallest eigenvalue) of the locked inertia
    """
    rng = np.random.default_rng(seed)
    datum = build_restricted_root_datum(n)
    worst = dict.fromkeys(
        ["zeta_A_zeta", "mu_Astar", "mu_Astar_general", "Astar_mu", "equivariance",
         "inertia_posdef"], 0.0)
    min_eig = np.inf

    def bump(key, value):
        worst[key] = max(worst[key], float(value))

    for _ in range(samples):
        a = random_regular_config(n, rng)
        X = random_algebra(n, rng)
        v = random_hermitian(n, rng)
        zeta = commutator(X, a)
        bump("zeta_A_zeta", np.max(np.abs(commutator(connection_form(a, zeta, datum), a) - zeta)))

        q = np.sort(rng.normal(scale=1.5, size=n))[::-1]
        while np.min(-np.diff(q)) < 0.1:
            q = np.sort(rng.normal(scale=1.5, size=n))[::-1]
        lam = random_spin(n, rng)
        Q = np.diag(q).astype(complex)
        bump("mu_Astar", np.max(np.abs(commutator(Q, connection_dual(q, lam)) - lam)))

        U = np.linalg.eigh(a)[1]
        lam_a = U @ random_spin(n, rng) @ dagger(U)
        bump("mu_Astar_general",
             np.max(np.abs(commutator(a, connection_dual_at(a, lam_a)) - lam_a)))

        vert = commutator(X, a)
        bump("Astar_mu", np.max(np.abs(connection_dual_at(a, commutator(a, vert)) - vert)))

        g = random_unitary(n, rng)
        lhs = connection_form(adjoint_action(g, a), adjoint_action(g, v), datum)
        rhs = adjoint_action(g, connection_form(a, v, datum))
        bump("equivariance", np.max(np.abs(lhs - rhs)))

        eig = np.linalg.eigvalsh(locked_inertia(a, datum).gram)
        min_eig = min(min_eig, float(eig[0]))
        bump("inertia_posdef", max(0.0, -eig[0]))

    return ConnectionReport(n=n, samples=samples, residuals=worst,
                            min_inertia_eigenvalue=min_eig, tol=tol)


def weinstein_suite(n, seed, pairs, h=FD_STEP, vertical_fraction=0.5):
    """Residuals of ``verify_weinstein_form`` over random charts and tangent pairs."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(pairs):
        w = random_chart(n, rng)
        vertical = k < int(round(vertical_fraction * pairs))
        t1 = random_chart_tangent(n, rng, vertical=vertical)
        t2 = random_chart_tangent(n, rng, vertical=vertical)
        out.append((vertical, verify_weinstein_form(w, t1, t2, h)))
    return out


def reduced_form_suite(n, seed, pairs, h=FD_STEP):
    """Residuals of ``verify_reduced_form``; ill-conditioned samples are counted and skipped."""
    rng = np.random.default_rng(seed)
    checks, skipped = [], 0
    while len(checks) < pairs:
        a = random_regular_config(n, rng, min_gap=0.3)
        alpha = random_hermitian(n, rng)
        x = PhasePoint(a=a, alpha=alpha)
        kind = len(checks) % 3
        u1 = constrained_tangent(x, rng)
        if kind == 0:
            u2 = free_flow_tangent(x)
        elif kind == 1:
            u2 = gauge_tangent(x, random_algebra(n, rng))
        else:
            u2 = constrained_tangent(x, rng)
        try:
            checks.append(verify_reduced_form(x, u1, u2, h))
        except IllConditionedError:
            skipped += 1
            if skipped > pairs:
                raise
    return checks, skipped
