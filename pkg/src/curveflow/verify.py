"""Independent oracles and residual evaluation.

This module owns the shared geometric evaluation of a profile under a
problem (``surface_fields``), the elliptic residual F(kappa) - f(s, x, nu),
manufactured-solution construction, a gauge-fixed Newton oracle for the
n = 1 periodic problem, and the ring-integral cross-check tying the
quadrature indicator to the principal-radii product formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from types import SimpleNamespace

import numpy as np

from . import expressions
from .anisotropy import PrescribedData, SphereFunction, firey_G, power_law
from .errors import ConvexityError, DataError, DomainError, OracleError
from .profile import (FULL_CIRCLE, LATITUDE, RadialProfile, SupportProfile,
                      differentiate, evaluate, theta_grid)
from .spaceform import EUCLID, radial_graph_curvature, warping_values


@lru_cache(maxsize=32)
def _tan_grid(domain: str, M: int) -> np.ndarray:
    return np.tan(theta_grid(domain, M))


def surface_fields(profile, F, data: PrescribedData) -> SimpleNamespace:
    """Geometric state shared by flows, barriers and residuals.

    For support profiles (flat ambient) the fields are the support s, its
    derivative, principal curvatures, F values, contact distance and the
    prescribed f at the grid normals.  For radial graphs the curve curvature,
    graph support s = theta/v and tilt v are used instead, with the geodesic
    radius playing the role of |x|.  A one-dimensional normalized curvature
    function is the identity (F(kappa) = kappa by homogeneity), which the
    n = 1 paths use directly.
    """
    if isinstance(profile, RadialProfile):
        if F.n != 1:
            raise DomainError("radial graphs are one-dimensional curves (n = 1)")
        space = profile.space
        r = profile.values
        y = profile.theta
        rp, rpp = differentiate(profile)
        kappa = radial_graph_curvature(space, r, rp, rpp)
        bad = np.flatnonzero(kappa <= 0.0)
        if bad.size:
            raise ConvexityError(
                f"radial graph loses strict convexity at node {bad[0]}",
                node=int(bad[0]),
            )
        th, thp = warping_values(space.kind, r)
        v = np.sqrt(1.0 + space.sigma * (rp / th) ** 2)
        s = th / v
        nu = y + np.arctan2(-rp, th)
        f = data.evaluate(s, nu, absx=r, x_angle=y)
        return SimpleNamespace(kind="radial", s=s, sp=rp, kappa=kappa, F=kappa,
                               f=np.broadcast_to(np.asarray(f, dtype=float), s.shape),
                               v=v, nu=nu, absx=r, theta=y)

    s = profile.values
    sp, spp = differentiate(profile)
    r1 = spp + s
    bad = np.flatnonzero(r1 <= 0.0)
    if bad.size:
        raise ConvexityError(
            f"nonpositive principal radius at node {bad[0]}", node=int(bad[0])
        )
    if profile.n == 1:
        kappa = 1.0 / r1[:, None]
        Fv = kappa[:, 0]
    else:
        r2 = s - sp * _tan_grid(profile.domain, profile.M)
        bad = np.flatnonzero(r2 <= 0.0)
        if bad.size:
            raise ConvexityError(
                f"nonpositive parallel radius at node {bad[0]}", node=int(bad[0])
            )
        kappa = np.empty((profile.M, profile.n))
        kappa[:, 0] = 1.0 / r1
        kappa[:, 1:] = (1.0 / r2)[:, None]
        Fv = F.evaluate(kappa)
    nu = profile.theta
    if data.uses_position:
        absx = np.hypot(s, sp)
        x_angle = nu + np.arctan2(sp, s)
    else:
        absx = x_angle = None
    f = data.evaluate(s, nu, absx=absx, x_angle=x_angle)
    return SimpleNamespace(kind="support", s=s, sp=sp, kappa=kappa, F=Fv,
                           f=np.broadcast_to(np.asarray(f, dtype=float), s.shape),
                           v=None, nu=nu, absx=absx, theta=profile.theta)


def residual_values(profile, problem):
    """(F values, f values) at the grid nodes for profile under problem."""
    fields = surface_fields(profile, problem.F, problem.data)
    return fields.F, fields.f


def residual(profile, problem):
    """sup-norm and nodewise values of the elliptic defect F(kappa) - f."""
    Fv, fv = residual_values(profile, problem)
    nodewise = Fv - fv
    return float(np.max(np.abs(nodewise))), nodewise


# ---------------------------------------------------------------------------
# manufactured solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManufacturedPair:
    """An exact solution s_star together with the data that makes it exact."""

    s_star: SupportProfile
    data: PrescribedData
    q: float
    n: int


def make_manufactured(q: float, base, M: int = 256, fine: int = 1024) -> ManufacturedPair:
    """Build power-law data f = s^(1-q) phi(nu) solved exactly by ``base``.

    ``base`` is an expression in theta (or a callable) for the support
    function of a planar body (n = 1).  With kappa = 1/(s'' + s), the choice
    phi = kappa * s^(q-1) makes the equation hold identically.  phi is
    carried as a trigonometric interpolant on a fine grid, so it can be
    evaluated at arbitrary angles with spectral accuracy.
    """
    if callable(base):
        fn = base
    else:
        node = expressions.parse_expression(base)
        extra = node.variables() - {"theta"}
        if extra:
            raise DataError(f"manufactured base may only use theta, got {sorted(extra)}")
        fn = lambda th: expressions.evaluate(node, theta=th)

    th_fine = theta_grid(FULL_CIRCLE, fine)
    s_fine = SupportProfile(np.asarray(fn(th_fine), dtype=float), FULL_CIRCLE, 1)
    _, spp = differentiate(s_fine)
    r1 = spp + s_fine.values
    if np.min(r1) <= 0.0:
        raise ConvexityError(
            f"manufactured base is not strictly convex: min(s''+s) = {np.min(r1):.3e}",
            node=int(np.argmin(r1)),
        )
    phi_vals = (1.0 / r1) * s_fine.values ** (q - 1.0)
    phi_profile = SupportProfile(phi_vals, FULL_CIRCLE, 1)
    phi = SphereFunction.from_callable(
        lambda t: evaluate(phi_profile, t),
        description=f"manufactured phi from base {getattr(base, '__name__', base)!r}",
    ).memoized_on_grids()
    data = power_law(q, phi, n=1)
    th = theta_grid(FULL_CIRCLE, M)
    s_star = SupportProfile(np.asarray(fn(th), dtype=float), FULL_CIRCLE, 1)
    return ManufacturedPair(s_star=s_star, data=data, q=float(q), n=1)


# ---------------------------------------------------------------------------
# n = 1 periodic BVP oracle
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _dense_operators(M: int):
    """Dense spectral d/dtheta and d2/dtheta2 on the full circle, cached."""
    k = np.arange(M // 2 + 1, dtype=float)
    d1m = 1j * k
    d1m[-1] = 0.0
    d2m = -(k**2)
    eye = np.eye(M)
    spec = np.fft.rfft(eye, axis=0)
    D1 = np.fft.irfft(spec * d1m[:, None], n=M, axis=0).T
    D2 = np.fft.irfft(spec * d2m[:, None], n=M, axis=0).T
    return D1.copy(), D2.copy()


def remove_first_harmonic(values: np.ndarray) -> np.ndarray:
    """Project out the cos/sin first harmonics (translation gauge at n = 1)."""
    coeff = np.fft.rfft(np.asarray(values, dtype=float))
    coeff[1] = 0.0
    return np.fft.irfft(coeff, n=len(values))


def evaluate_gap(a: SupportProfile, b: SupportProfile) -> float:
    """Gauge-fixed sup gap between two full-circle support profiles.

    Both profiles are projected onto the translation-gauge complement (zero
    first harmonic) and compared on the finer of the two grids.
    """
    M = max(a.M, b.M)
    th = theta_grid(FULL_CIRCLE, M)
    va = a.values if a.M == M else evaluate(a, th)
    vb = b.values if b.M == M else evaluate(b, th)
    return float(np.max(np.abs(remove_first_harmonic(va) - remove_first_harmonic(vb))))


def _oracle_f(data: PrescribedData, theta, s, sp):
    absx = np.hypot(s, sp)
    x_angle = theta + np.arctan2(sp, s)
    return np.asarray(data.evaluate(s, theta, absx=absx, x_angle=x_angle), dtype=float)


def bvp_oracle_n1(problem, init=None, M: int = 256, tol: float = 1e-12,
                  max_iter: int = 10_000) -> SupportProfile:
    """Gauge-fixed solution of s'' + s = 1/f(s, x(theta), theta) on the circle.

    The operator d2/dtheta2 + 1 has the translation modes cos/sin theta in
    its kernel, so the residual and all updates are projected onto their
    orthogonal complement and the solution is normalized to have zero first
    harmonic.  The projected equation is solved by a damped Newton iteration
    with a spectral Jacobian; iteration stops when the update falls below
    ``tol`` in sup norm.  Non-convergence raises OracleError: the oracle is
    never silently trusted.
    """
    data = problem.data
    if getattr(problem, "n", 1) != 1:
        raise DomainError("the periodic oracle covers n = 1 only")
    th = theta_grid(FULL_CIRCLE, M)
    if init is None:
        barriers = getattr(problem, "barriers", None)
        if barriers is not None:
            base = 0.5 * (barriers.r_lower + barriers.r_upper)
        else:
            a, b = problem.space.annulus
            base = math.sqrt(a * b)
        s = np.full(M, float(base))
    elif isinstance(init, SupportProfile):
        s = evaluate(init, th) if init.M != M else init.values.copy()
    else:
        s = np.full(M, float(init))
    s = remove_first_harmonic(s)

    D1, D2 = _dense_operators(M)
    eye = np.eye(M)
    c, sn = np.cos(th), np.sin(th)
    P = eye - (2.0 / M) * (np.outer(c, c) + np.outer(sn, sn))

    def projected_residual(sv):
        sp = D1 @ sv
        g = 1.0 / _oracle_f(data, th, sv, sp)
        return P @ (D2 @ sv + sv - g), sp, g

    R, sp, g = projected_residual(s)
    norm = float(np.max(np.abs(R)))
    for _ in range(max_iter):
        f0 = 1.0 / g
        h = 1e-6 * max(1.0, float(np.max(np.abs(s))))
        nu_x = np.stack([np.cos(th), np.sin(th)], axis=-1)
        # d f / d s_node moves the contact point along nu, d f / d s'_node along nu_perp
        def fval(ds, dsp):
            return _oracle_f(data, th, s + ds, sp + dsp)

        dfds = (fval(h, 0.0) - fval(-h, 0.0)) / (2 * h)
        dfdsp = (fval(0.0, h) - fval(0.0, -h)) / (2 * h)
        g_s = -dfds / f0**2
        g_sp = -dfdsp / f0**2
        J = D2 + eye - np.diag(g_s) - np.diag(g_sp) @ D1
        Jp = P @ J @ P + (eye - P)
        try:
            delta = np.linalg.solve(Jp, -R)
        except np.linalg.LinAlgError as exc:
            raise OracleError(f"oracle Jacobian is singular: {exc}") from exc
        delta = P @ delta

        lam, accepted = 1.0, False
        while lam > 1e-6:
            cand = s + lam * delta
            if np.all(cand > 0.0):
                try:
                    R_new, sp_new, g_new = projected_residual(cand)
                except DataError:
                    lam *= 0.5
                    continue
                norm_new = float(np.max(np.abs(R_new)))
                if norm_new < norm or norm_new < tol:
                    s, R, sp, g, norm = cand, R_new, sp_new, g_new, norm_new
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise OracleError(
                f"periodic oracle diverged: no descent at residual {norm:.3e}"
            )
        if float(np.max(np.abs(lam * delta))) < tol * max(1.0, float(np.max(np.abs(s)))):
            return SupportProfile(s, FULL_CIRCLE, 1)
    raise OracleError(f"periodic oracle failed to converge in {max_iter} iterations")


# ---------------------------------------------------------------------------
# ring-integral cross-check and spherical-Hessian quadratic bound
# ---------------------------------------------------------------------------


def radii_psi(s_profile: SupportProfile, n: int, k: int):
    """sigma_k of the principal radii as a callable of latitude.

    For an axisymmetric body the radii multiset is {r1, r2 x (n-1)} with
    r1 = s'' + s and r2 = s - s' tan(theta), so

        psi = C(n-1, k) r2^k + C(n-1, k-1) r1 r2^(k-1).
    """
    if s_profile.domain != LATITUDE:
        raise DomainError("radii_psi expects a latitude profile")

    def psi(alpha):
        alpha = np.asarray(alpha, dtype=float)
        s = evaluate(s_profile, alpha)
        sp = evaluate(s_profile, alpha, deriv=1)
        spp = evaluate(s_profile, alpha, deriv=2)
        r1 = spp + s
        r2 = s - sp * np.tan(alpha)
        return (math.comb(n - 1, k) * r2**k
                + math.comb(n - 1, k - 1) * r1 * r2 ** (k - 1))

    return psi


def firey_crosscheck(s_profile: SupportProfile, n: int, k: int) -> float:
    """Sup gap between the quadrature indicator and the radii product.

    Builds psi = sigma_k(radii) from the profile, evaluates G once through
    the ring integral and once as C(n-1,k-1) r1 r2^(k-1), and returns the
    sup-norm difference over the grid.  The two agree identically for any
    smooth axisymmetric body.
    """
    psi = radii_psi(s_profile, n, k)
    th = s_profile.theta
    G_quad = firey_G(psi, n, k, th)
    sp, spp = differentiate(s_profile)
    r1 = spp + s_profile.values
    r2 = s_profile.values - sp * np.tan(th)
    G_prod = math.comb(n - 1, k - 1) * r1 * r2 ** (k - 1)
    return float(np.max(np.abs(G_quad - G_prod)))


def hessian_estimate_margin(phi, q: float, s_value: float, vartheta: float,
                            t_values=None, grid: int = 256) -> float:
    """Worst margin of the quadratic lower bound used for curvature caps.

    For f = s^(1-q) phi(nu) with q(q-1) > 0 the quadratic
    Q(t) = vartheta^2 f_ss t^2 + 2 vartheta f_{s nu} t + f_{nu nu}
    is bounded below by q s^(1-q) phi^(1-1/q) (phi^(1/q))'' pointwise; the
    bound is the exact minimum of Q, so the returned margin should be
    nonnegative up to roundoff.
    """
    if q * (q - 1.0) <= 0:
        raise DomainError("the quadratic bound requires q(q-1) > 0")
    phi = phi if isinstance(phi, SphereFunction) else SphereFunction.from_callable(phi)
    from .profile import spectral_derivatives

    th = theta_grid(LATITUDE, grid)
    ph = np.broadcast_to(np.asarray(phi(th), dtype=float), th.shape).copy()
    php, phpp = spectral_derivatives(ph, LATITUDE)
    u = ph ** (1.0 / q)
    _, upp = spectral_derivatives(u, LATITUDE)

    s = float(s_value)
    f_ss = q * (q - 1.0) * s ** (-(q + 1.0)) * ph
    f_snu = (1.0 - q) * s ** (-q) * php
    f_nunu = s ** (1.0 - q) * phpp
    rhs = q * s ** (1.0 - q) * ph ** (1.0 - 1.0 / q) * upp

    if t_values is None:
        t_values = np.linspace(-3.0, 3.0, 25)
    worst = np.inf
    for t in t_values:
        Q = vartheta**2 * f_ss * t**2 + 2.0 * vartheta * f_snu * t + f_nunu
        worst = min(worst, float(np.min(Q - rhs)))
    return worst


def verification_report(profile, problem, oracle_gap=None, firey_gap=None) -> dict:
    """Assemble the verification JSON payload."""
    sup, _ = residual(profile, problem)
    report = {
        "residual_sup": sup,
        "oracle_gap": oracle_gap,
        "firey_gap": firey_gap,
        "invariants": {
            "residual_finite": bool(np.isfinite(sup)),
        },
    }
    return report
