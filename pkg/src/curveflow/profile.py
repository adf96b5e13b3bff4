"""Discrete axisymmetric profiles with spectral differentiation.

Two grid families:

* ``full_circle``: theta_j = 2 pi j / M on [0, 2pi), used for support
  functions of planar convex bodies (n = 1) and for radial graphs.  M must
  be a power of two (transform efficiency, not correctness).
* ``latitude``: midpoint nodes theta_j = -pi/2 + (j + 1/2) pi / M on
  (-pi/2, pi/2), used for axisymmetric support functions on S^n, n >= 2.
  Differentiation reflects the data over the poles (values extended by
  s(pi - theta)), which is exact for smooth axisymmetric sphere functions
  and enforces s'(+-pi/2) = 0.

Principal radii of a support profile: r1 = s'' + s (meridian) and, for
n >= 2, r2 = s - s' tan(theta) (parallel directions, multiplicity n-1).
At the poles r2 has the umbilic limit r1; the midpoint grid never places a
node there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ConvexityError, DomainError
from .spaceform import SpaceformConfig

FULL_CIRCLE = "full_circle"
LATITUDE = "latitude"


@lru_cache(maxsize=64)
def theta_grid(domain: str, M: int) -> np.ndarray:
    if domain == FULL_CIRCLE:
        grid = np.arange(M) * (2.0 * np.pi / M)
    elif domain == LATITUDE:
        grid = -np.pi / 2 + (np.arange(M) + 0.5) * (np.pi / M)
    else:
        raise DomainError(f"unknown grid domain: {domain!r}")
    grid.flags.writeable = False  # cached and shared
    return grid


@lru_cache(maxsize=64)
def _spectral_setup(domain: str, M: int):
    """(N, theta0, d1 multiplier, d2 multiplier) for the periodic transform."""
    if domain == FULL_CIRCLE:
        N, theta0 = M, 0.0
    else:
        N, theta0 = 2 * M, -np.pi / 2 + np.pi / (2 * M)
    k = np.arange(N // 2 + 1, dtype=float)
    d1 = 1j * k
    if N % 2 == 0:
        d1[-1] = 0.0  # odd derivative of the unmatched highest mode
    d2 = -(k**2)
    d1.flags.writeable = False
    d2.flags.writeable = False
    return N, theta0, d1, d2


def _extend(domain: str, values: np.ndarray) -> np.ndarray:
    if domain == FULL_CIRCLE:
        return values
    return np.concatenate([values, values[::-1]])


def _filtered_rfft(ext: np.ndarray) -> np.ndarray:
    """rfft with the roundoff floor zeroed.

    Coefficients 15 orders below the dominant one are rounding noise; the
    k^2 multiplier of the second derivative would amplify that floor to
    ~1e-9 on fine grids, so it is removed before differentiating.
    """
    coeff = np.fft.rfft(ext)
    floor = 1e-15 * np.max(np.abs(coeff))
    coeff[np.abs(coeff) < floor] = 0.0
    return coeff


@dataclass(frozen=True)
class SupportProfile:
    """Support function samples on one of the two grids."""

    values: np.ndarray
    domain: str = FULL_CIRCLE
    n: int = 1

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        M = vals.size
        if M < 16:
            raise DomainError("grid size must be at least 16")
        if self.domain == FULL_CIRCLE:
            if self.n != 1:
                raise DomainError("full_circle grids represent n = 1 bodies")
            if M & (M - 1):
                raise DomainError("full_circle grid size must be a power of two")
        elif self.domain == LATITUDE:
            if self.n < 2:
                raise DomainError("latitude grids represent axisymmetric n >= 2 bodies")
        else:
            raise DomainError(f"unknown grid domain: {self.domain!r}")
        if np.any(vals <= 0.0):
            raise DomainError("support function must be positive at every node")

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return theta_grid(self.domain, self.M)

    def with_values(self, values) -> "SupportProfile":
        return SupportProfile(values, domain=self.domain, n=self.n)


@dataclass(frozen=True)
class RadialProfile:
    """Radial graph samples r(y) on the full circle (n = 1 curves)."""

    values: np.ndarray
    space: SpaceformConfig

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        M = vals.size
        if M < 16 or (M & (M - 1)):
            raise DomainError("radial grids use a power-of-two size >= 16")
        self.space.require_inside(vals)

    @property
    def domain(self) -> str:
        return FULL_CIRCLE

    @property
    def n(self) -> int:
        return 1

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return theta_grid(FULL_CIRCLE, self.M)

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(values, space=self.space)


def spectral_derivatives(values, domain: str) -> tuple[np.ndarray, np.ndarray]:
    """Spectral first and second derivatives of raw grid samples."""
    values = np.asarray(values, dtype=float)
    N, _, d1, d2 = _spectral_setup(domain, values.size)
    coeff = _filtered_rfft(_extend(domain, values))
    both = np.fft.irfft(np.stack([coeff * d1, coeff * d2]), n=N, axis=-1)
    M = values.size
    return both[0, :M], both[1, :M]


def differentiate(profile) -> tuple[np.ndarray, np.ndarray]:
    """Spectral first and second derivatives at the grid nodes."""
    return spectral_derivatives(profile.values, profile.domain)


def damped_increment(increment, domain: str, strength: float) -> np.ndarray:
    """Apply the modewise factor 1/(1 + strength k^2) to an update.

    This is the implicit treatment of a diffusion term with coefficient
    strength/dt: solving (I - dt a d^2) u_new = u + dt G(u) mode by mode.
    Fixed points are untouched (zero increments stay zero).
    """
    increment = np.asarray(increment, dtype=float)
    N, _, _, d2 = _spectral_setup(domain, increment.size)
    coeff = np.fft.rfft(_extend(domain, increment))
    coeff /= 1.0 - strength * d2  # d2 = -k^2
    out = np.fft.irfft(coeff, n=N)
    return out[:increment.size]


def evaluate(profile, theta, deriv: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant (or a derivative) anywhere.

    Only the modes above the roundoff floor enter the sum, so smooth
    profiles evaluate in O(significant modes) per point.
    """
    values = profile.values
    domain = profile.domain
    N, theta0, _, _ = _spectral_setup(domain, values.size)
    coeff = _filtered_rfft(_extend(domain, values))
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 0
    tp = np.atleast_1d(theta) - theta0
    k = np.arange(N // 2 + 1, dtype=float)
    mult = (1j * k) ** deriv
    if N % 2 == 0 and deriv % 2 == 1:
        mult = mult.copy()
        mult[-1] = 0.0
    weights = np.full(N // 2 + 1, 2.0)
    weights[0] = 1.0
    if N % 2 == 0:
        weights[-1] = 1.0
    terms = mult * weights * coeff
    keep = np.flatnonzero(terms != 0.0)
    phases = np.exp(1j * np.outer(tp, k[keep]))
    out = (phases * terms[keep]).real.sum(axis=1) / N
    return float(out[0]) if single else out


def parity_tail_fraction(profile) -> float:
    """Energy fraction in the top 10% of modes; large values flag data whose
    pole extension is not smooth (invalid axisymmetric sphere function)."""
    coeff = np.fft.rfft(_extend(profile.domain, profile.values))
    power = np.abs(coeff) ** 2
    power[0] = 0.0  # ignore the mean
    total = power.sum()
    if total == 0.0:
        return 0.0
    cutoff = int(0.9 * power.size)
    return float(power[cutoff:].sum() / total)


def principal_radii(profile: SupportProfile):
    """Nodewise principal radii; (r1,) for n = 1, (r1, r2) for n >= 2.

    Nonpositive radii are reported, not raised; callers that need curvatures
    go through ``principal_curvatures``.
    """
    sp, spp = differentiate(profile)
    r1 = spp + profile.values
    if profile.domain == FULL_CIRCLE:
        return (r1,)
    r2 = profile.values - sp * np.tan(profile.theta)
    return (r1, r2)


def principal_curvatures(profile: SupportProfile):
    """Reciprocal radii; raises ConvexityError at the first nonpositive radius."""
    radii = principal_radii(profile)
    for r in radii:
        bad = np.flatnonzero(r <= 0.0)
        if bad.size:
            raise ConvexityError(
                f"nonpositive principal radius at node {bad[0]} "
                f"(theta = {profile.theta[bad[0]]:.6f}, r = {r[bad[0]]:.3e})",
                node=int(bad[0]),
            )
    return tuple(1.0 / r for r in radii)


def curvature_matrix(profile: SupportProfile) -> np.ndarray:
    """(M, n) principal-curvature rows (kappa_1, kappa_2, ..., kappa_2)."""
    kappas = principal_curvatures(profile)
    M, n = profile.M, profile.n
    out = np.empty((M, n))
    out[:, 0] = kappas[0]
    if n > 1:
        out[:, 1:] = kappas[1][:, None]
    return out


def contact_point(profile: SupportProfile, theta=None):
    """Body point touching the support plane with normal angle theta.

    Returns (x, |x|) where x lies in the meridian plane,
    x = s nu + s' nu_perp, so |x|^2 = s^2 + s'^2 holds exactly.
    """
    if theta is None:
        th = profile.theta
        s = profile.values
        sp, _ = differentiate(profile)
    else:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        s = evaluate(profile, th)
        sp = evaluate(profile, th, deriv=1)
    nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
    nu_perp = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    x = s[..., None] * nu + sp[..., None] * nu_perp
    return x, np.hypot(s, sp)


@dataclass
class FlowDiagnostics:
    """Point-in-time health report of a flow state."""

    min_radius: float
    max_radius: float
    pinching_trace: float      # B = sum of principal radii (max over nodes)
    pinch_ratio: float         # max kappa / min kappa over all nodes
    F_range: tuple[float, float]
    residual: float            # sup |F - f|
    barrier_ok: bool
    convex: bool


def diagnostics(profile, problem) -> FlowDiagnostics:
    """Fill a FlowDiagnostics for ``profile`` under ``problem``.

    Never raises on near-degeneracy: convexity loss is reported through the
    ``convex`` flag with NaN residual so the caller can shrink its step.
    """
    from .verify import residual_values  # local import, verify sits above profile

    if isinstance(profile, RadialProfile):
        # radii diagnostics via the curve curvature
        from .spaceform import radial_graph_curvature

        rp, rpp = differentiate(profile)
        kappa = radial_graph_curvature(profile.space, profile.values, rp, rpp)
        convex = bool(np.all(kappa > 0.0))
        radii = (1.0 / kappa,) if convex else (np.full(profile.M, np.nan),)
    else:
        radii = principal_radii(profile)
        convex = bool(all(np.all(r > 0.0) for r in radii))

    rmin = float(min(np.min(r) for r in radii))
    rmax = float(max(np.max(r) for r in radii))
    B = radii[0].copy()
    if len(radii) > 1:
        B = B + (profile.n - 1) * radii[1]
    if convex:
        kmax = max(np.max(1.0 / r) for r in radii)
        kmin = min(np.min(1.0 / r) for r in radii)
        pinch = float(kmax / kmin)
        Fv, fv = residual_values(profile, problem)
        res = float(np.max(np.abs(Fv - fv)))
        F_range = (float(np.min(Fv)), float(np.max(Fv)))
    else:
        pinch, res, F_range = float("inf"), float("nan"), (float("nan"), float("nan"))

    barriers = getattr(problem, "barriers", None)
    if barriers is None:
        ok = True
    else:
        slack = 1e-9 * (barriers.r_upper - barriers.r_lower)
        ok = bool(
            np.all(profile.values >= barriers.r_lower - slack)
            and np.all(profile.values <= barriers.r_upper + slack)
        )
    return FlowDiagnostics(
        min_radius=rmin,
        max_radius=rmax,
        pinching_trace=float(np.max(B)),
        pinch_ratio=pinch,
        F_range=F_range,
        residual=res,
        barrier_ok=ok,
        convex=convex,
    )


# ---------------------------------------------------------------------------
# serialization: JSON round-trips are bit exact (repr shortest round-trip)
# ---------------------------------------------------------------------------


def profile_to_dict(profile) -> dict:
    if isinstance(profile, RadialProfile):
        return {
            "domain": "radial",
            "n": 1,
            "M": profile.M,
            "space": {"kind": profile.space.kind, "annulus": list(profile.space.annulus)},
            "values": [float(v) for v in profile.values],
        }
    return {
        "domain": profile.domain,
        "n": profile.n,
        "M": profile.M,
        "values": [float(v) for v in profile.values],
    }


def profile_from_dict(obj: dict):
    domain = obj["domain"]
    values = np.asarray(obj["values"], dtype=float)
    if values.size != obj["M"]:
        raise DomainError("profile JSON: M does not match values length")
    if domain == "radial":
        space = SpaceformConfig(obj["space"]["kind"], tuple(obj["space"]["annulus"]))
        return RadialProfile(values, space=space)
    return SupportProfile(values, domain=domain, n=int(obj["n"]))


def profile_to_json(profile) -> str:
    return json.dumps(profile_to_dict(profile), sort_keys=True)


def profile_from_json(text: str):
    return profile_from_dict(json.loads(text))


def profile_to_csv(profile) -> str:
    name = "r" if isinstance(profile, RadialProfile) else "s"
    lines = [f"theta,{name}"]
    for t, v in zip(profile.theta, profile.values):
        lines.append(f"{float(t)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def profile_from_csv(text: str, domain: str = FULL_CIRCLE, n: int = 1, space=None):
    rows = [ln for ln in text.strip().splitlines()[1:] if ln]
    values = np.array([float(ln.split(",")[1]) for ln in rows])
    if space is not None:
        return RadialProfile(values, space=space)
    return SupportProfile(values, domain=domain, n=n)


def round_profile(value: float, M: int = 128, domain: str = FULL_CIRCLE, n: int = 1):
    return SupportProfile(np.full(M, float(value)), domain=domain, n=n)
