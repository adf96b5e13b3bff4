"""Symmetric curvature functions on the positive cone.

All functions F here are positive, strictly monotone, 1-homogeneous and
normalized so that F(1, ..., 1) = n.  Supported families:

    mean            sigma_1
    power_mean(k)   n * (sigma_k / C(n,k))^(1/k)
    quotient(l,k)   n * (sigma_l C(n,k) / (sigma_k C(n,l)))^(1/(l-k))
    gauss           n * sigma_n^(1/n)

The module also provides the dual F_*(r) = 1/F(1/r) acting on principal
radii, and randomized verifiers for the structural hypotheses used by the
flows (inverse concavity, concavity, vanishing of the dual on the cone
boundary, and the gradient-growth class with exponent gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

GAMMA_SLACK = 10.0  # accepted ratio of fitted constant to the constructive one


def elementary_symmetric(kappa):
    """All elementary symmetric polynomials e_0..e_n of the rows of kappa.

    kappa has shape (..., n); returns shape (..., n+1) with e[..., p] = sigma_p.
    Built by multiplying out prod_i (1 + kappa_i t); additions of positive
    terms only, so stable on the positive cone.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        ki = kappa[..., i:i + 1]
        e[..., 1:i + 2] = e[..., 1:i + 2] + ki * e[..., 0:i + 1]
    return e


def _reduced_symmetric(kappa, p):
    """sigma_p(kappa | i) for every i: shape (..., n)."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    out = np.empty(kappa.shape)
    for i in range(n):
        rest = np.delete(kappa, i, axis=-1)
        out[..., i] = elementary_symmetric(rest)[..., p]
    return out


def _check_cone(kappa, n):
    kappa = np.atleast_2d(np.asarray(kappa, dtype=float))
    if kappa.shape[-1] != n:
        raise DomainError(f"expected points with {n} components, got {kappa.shape[-1]}")
    if np.any(kappa <= 0.0):
        raise DomainError("point outside the positive cone (some kappa_i <= 0)")
    return kappa


@dataclass(frozen=True)
class CurvatureFunction:
    """A member of one of the supported families, with analytic gradient."""

    family: str
    n: int
    k: int = 0
    l: int = 0
    # normalization constant, filled at construction and kept to full precision
    c_F: float = field(default=0.0)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension n must be >= 1")
        if self.family == "power_mean":
            if not 1 <= self.k <= self.n:
                raise DomainError("power_mean requires 1 <= k <= n")
            c = self.n / math.comb(self.n, self.k) ** (1.0 / self.k)
        elif self.family == "quotient":
            if not 1 <= self.k < self.l <= self.n:
                raise DomainError("quotient requires 1 <= k < l <= n")
            c = self.n * (math.comb(self.n, self.k) / math.comb(self.n, self.l)) ** (
                1.0 / (self.l - self.k)
            )
        else:
            raise DomainError(f"unknown curvature family: {self.family!r}")
        object.__setattr__(self, "c_F", c)

    @property
    def name(self) -> str:
        if self.family == "power_mean":
            if self.k == 1:
                return f"mean(n={self.n})"
            if self.k == self.n:
                return f"gauss(n={self.n})"
            return f"power_mean(k={self.k}, n={self.n})"
        return f"quotient(l={self.l}, k={self.k}, n={self.n})"

    def evaluate(self, kappa):
        """F at a cone point; vectorised over leading axes of kappa (..., n)."""
        single = np.ndim(kappa) == 1
        kb = _check_cone(kappa, self.n)
        e = elementary_symmetric(kb)
        if self.family == "power_mean":
            val = self.c_F * e[..., self.k] ** (1.0 / self.k)
        else:
            val = self.c_F * (e[..., self.l] / e[..., self.k]) ** (1.0 / (self.l - self.k))
        return float(val[0]) if single else val

    def gradient(self, kappa):
        """(dF/dkappa_1, ..., dF/dkappa_n), analytic, same batching as evaluate."""
        single = np.ndim(kappa) == 1
        kb = _check_cone(kappa, self.n)
        e = elementary_symmetric(kb)
        F = self.evaluate(kb)
        if self.family == "power_mean":
            minors = _reduced_symmetric(kb, self.k - 1)  # sigma_k^{ii}
            grad = (F / (self.k * e[..., self.k]))[..., None] * minors
        else:
            ml = _reduced_symmetric(kb, self.l - 1)
            mk = _reduced_symmetric(kb, self.k - 1)
            grad = (F / (self.l - self.k))[..., None] * (
                ml / e[..., self.l:self.l + 1] - mk / e[..., self.k:self.k + 1]
            )
        return grad[0] if single else grad

    def dual(self) -> "DualCurvatureFunction":
        """F_* with F_*(r) = 1/F(1/r)."""
        return DualCurvatureFunction(self)


@dataclass(frozen=True)
class DualCurvatureFunction:
    """The inverse curvature function F_* acting on principal radii."""

    base: CurvatureFunction

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def name(self) -> str:
        return f"dual[{self.base.name}]"

    def evaluate(self, radii):
        single = np.ndim(radii) == 1
        rb = _check_cone(radii, self.n)
        val = 1.0 / self.base.evaluate(1.0 / rb)
        return float(val[0]) if single else val

    def gradient(self, radii):
        single = np.ndim(radii) == 1
        rb = _check_cone(radii, self.n)
        inv = 1.0 / rb
        Fv = self.base.evaluate(inv)
        grad = self.base.gradient(inv) / (Fv**2)[..., None] / rb**2
        return grad[0] if single else grad

    def dual(self) -> CurvatureFunction:
        return self.base


def mean(n: int) -> CurvatureFunction:
    return CurvatureFunction("power_mean", n, k=1)


def power_mean(k: int, n: int) -> CurvatureFunction:
    return CurvatureFunction("power_mean", n, k=k)


def quotient(l: int, k: int, n: int) -> CurvatureFunction:
    return CurvatureFunction("quotient", n, k=k, l=l)


def gauss(n: int) -> CurvatureFunction:
    return CurvatureFunction("power_mean", n, k=n)


# ---------------------------------------------------------------------------
# structural verifiers
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    """Outcome of a sampled structural check, with the worst margin seen."""

    holds: bool
    margin: float
    detail: str = ""


@dataclass
class LambdaEpsReport:
    classified: bool
    holds: bool
    eps: float
    gamma: float
    fitted_C: float
    theoretical_C: Optional[float]
    detail: str = ""


@dataclass
class StructureReport:
    name: str
    inverse_concave: Verdict
    concave: Verdict
    dual_vanishes_on_boundary: Verdict
    lambda_eps: Optional[LambdaEpsReport]
    samples_used: int

    def all_hold(self) -> bool:
        checks = [self.inverse_concave.holds, self.dual_vanishes_on_boundary.holds]
        if self.lambda_eps is not None and self.lambda_eps.classified:
            checks.append(self.lambda_eps.holds)
        return all(checks)


def sample_cone(n, count, rng, low=1e-3, high=1e3):
    """Log-uniform samples in the positive cone, component range [low, high]."""
    u = rng.uniform(np.log(low), np.log(high), size=(count, n))
    return np.exp(u)


def _midpoint_concavity(evaluate, pairs_a, pairs_b, tol):
    mid = evaluate((pairs_a + pairs_b) / 2.0)
    avg = (evaluate(pairs_a) + evaluate(pairs_b)) / 2.0
    margins = mid - avg
    worst = float(np.min(margins))
    return Verdict(holds=worst >= -tol, margin=worst)


def check_inverse_concave(F, sample_count=10_000, seed=0, tol=1e-10):
    """Midpoint-concavity test of F_* on random pairs in the cone."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    a = sample_cone(F.n, sample_count, rng)
    b = sample_cone(F.n, sample_count, rng)
    dual = F.dual()
    v = _midpoint_concavity(dual.evaluate, a, b, tol)
    v.detail = f"{sample_count} midpoint pairs on {F.name}"
    return v


def check_concave(F, sample_count=10_000, seed=0, tol=1e-10):
    """Midpoint-concavity test of F itself."""
    rng = np.random.default_rng(seed)
    a = sample_cone(F.n, sample_count, rng)
    b = sample_cone(F.n, sample_count, rng)
    v = _midpoint_concavity(F.evaluate, a, b, tol)
    v.detail = f"{sample_count} midpoint pairs on {F.name}"
    return v


def check_dual_boundary(F, t_sequence=None):
    """Does F_*(t, 1, ..., 1) vanish as t -> 0?

    The values along a geometric t-sequence decay like C t^alpha when the
    dual vanishes (alpha = 1/k for the k-th root families), so the limit is
    read off by Aitken extrapolation; requiring the raw value at the
    smallest t to be tiny would misclassify the slow t^(1/k) decays.  True
    iff the sequence decreases monotonically and the extrapolated limit is
    below 1e-6.  Quotients with the top symmetric polynomial upstairs keep
    a positive limit and report False.
    """
    if t_sequence is None:
        t_sequence = np.logspace(-1, -8, 15)
    dual = F.dual()
    vals = []
    for t in t_sequence:
        point = np.ones(F.n)
        point[0] = t
        vals.append(dual.evaluate(point))
    vals = np.asarray(vals)
    monotone = bool(np.all(np.diff(vals) <= 1e-14))
    d1 = vals[-2] - vals[-3]
    d2 = vals[-1] - vals[-2]
    if abs(d2 - d1) > 1e-300:
        limit = float(vals[-1] - d2**2 / (d2 - d1))
    else:
        limit = float(vals[-1])
    holds = monotone and abs(limit) < 1e-6
    return Verdict(holds=holds, margin=limit,
                   detail=f"extrapolated limit of F_*(t,1,...,1), final t={t_sequence[-1]:.1e}")


def gamma_for(F) -> Optional[float]:
    """Known growth exponent gamma with F^{ii} kappa_i^2 <= C_eps F^gamma.

    Quotients: gamma = l - k + 1.  The mean (power_mean k=1): gamma = 2 with
    C = 1, from max_i kappa_i <= sigma_1.  Other families are unclassified.
    """
    if F.family == "quotient":
        return float(F.l - F.k + 1)
    if F.family == "power_mean" and F.k == 1:
        return 2.0
    return None


def lambda_eps_constant(F, eps: float) -> Optional[float]:
    """Constructive constant for the gradient-growth bound, when known.

    For quotients the chain sigma_{p-1} <= (n/(eps(n-p+1))) sigma_p for
    p = k+2..l combined with sum_i sigma_p^{ii} kappa_i^2 =
    sigma_1 sigma_p - (p+1) sigma_{p+1} gives, for the unnormalized quotient,

        sum_i F^{ii} kappa_i^2 <= (k+1)/(l-k) * (n/eps)^{l-k-1}
                                  * prod_{p=k+2}^{l} 1/(n-p+1) * F^{l-k+1},

    and the normalization F -> c_F F rescales the constant by c_F^{-(l-k)}.
    For the mean the exact constant is 1.
    """
    if F.family == "power_mean" and F.k == 1:
        return 1.0
    if F.family != "quotient":
        return None
    k, l, n = F.k, F.l, F.n
    c = (k + 1) / (l - k) * (n / eps) ** (l - k - 1)
    for p in range(k + 2, l + 1):
        c /= (n - p + 1)
    return c * F.c_F ** (-(l - k))


def check_lambda_eps(F, eps: float, sample_count=10_000, seed=0) -> LambdaEpsReport:
    """Sampled check of max_i F^{ii} kappa_i^2 <= C_eps F^gamma on Gamma_eps.

    Components are sampled log-uniformly in [eps, 1e3].  For families with a
    known gamma the fitted constant must stay within GAMMA_SLACK times the
    constructive one; otherwise a gamma is fitted by log-log regression and
    reported without any claim.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    rng = np.random.default_rng(seed)
    kappa = sample_cone(F.n, sample_count, rng, low=eps, high=1e3)
    Fv = F.evaluate(kappa)
    grad = F.gradient(kappa)
    growth = np.max(grad * kappa**2, axis=-1)

    gamma = gamma_for(F)
    if gamma is None:
        # regression fit: log growth ~ gamma * log F + log C
        A = np.vstack([np.log(Fv), np.ones_like(Fv)]).T
        coef, *_ = np.linalg.lstsq(A, np.log(growth), rcond=None)
        fitted_gamma = float(coef[0])
        fitted_C = float(np.max(growth / Fv**fitted_gamma))
        return LambdaEpsReport(
            classified=False,
            holds=False,
            eps=eps,
            gamma=fitted_gamma,
            fitted_C=fitted_C,
            theoretical_C=None,
            detail=f"{F.name}: not classified; fitted gamma reported only",
        )

    fitted_C = float(np.max(growth / Fv**gamma))
    theo = lambda_eps_constant(F, eps)
    holds = fitted_C <= GAMMA_SLACK * theo
    return LambdaEpsReport(
        classified=True,
        holds=holds,
        eps=eps,
        gamma=gamma,
        fitted_C=fitted_C,
        theoretical_C=theo,
        detail=f"{F.name}: {sample_count} samples on Gamma_eps(eps={eps})",
    )


def structure_report(F, sample_count=10_000, eps=None, seed=0) -> StructureReport:
    """Run the full battery of structural checks on F."""
    lam = check_lambda_eps(F, eps, sample_count=sample_count, seed=seed) if eps else None
    return StructureReport(
        name=F.name,
        inverse_concave=check_inverse_concave(F, sample_count, seed=seed),
        concave=check_concave(F, sample_count, seed=seed + 1),
        dual_vanishes_on_boundary=check_dual_boundary(F),
        lambda_eps=lam,
        samples_used=sample_count,
    )
