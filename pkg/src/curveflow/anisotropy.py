"""Prescribed anisotropy data f(s, x, nu) and its admissibility checks.

Structured families (k-th root form, so that a normalized curvature function
of degree one can be prescribed directly):

    power_law          f = s^(1-q) phi(nu)
    curvature_measure  f^k = s^p |x|^-(n+1) phi(x/|x|)
    dual_minkowski     f^k = s |x|^(q-n-1) phi(nu)
    lp_aleksandrov     f^k = s^(1-p) |x|^-(n+1) phi(nu)
    expression         f = user formula in (s, theta, absx)

Angles are radians; ``theta``/``nu`` denote the normal angle, ``absx`` the
distance from the origin (geodesic radius for radial graphs in curved
ambients).  The admissibility checks cover the strict position-concavity
condition for convergence of the expanding flows, the spherical Hessian
(Guan-Ma type) conditions for the contracting flows, and Firey's integral
conditions with the identity linking them to principal radii.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import expressions
from .errors import DataError, DomainError
from .profile import LATITUDE, spectral_derivatives, theta_grid
from .spaceform import SpaceformConfig, warping_values

parse_expression = expressions.parse_expression

_POLE_SPLIT = np.pi / 2 - 0.4  # beyond this latitude the ring integral is
# evaluated in the u = cos(alpha) variable, which stays relatively accurate
# as the integration range degenerates at the pole.


# ---------------------------------------------------------------------------
# sphere functions
# ---------------------------------------------------------------------------


class _GridMemo:
    """Memoize a callable on the shared read-only grid arrays.

    Flows evaluate the anisotropy at the same cached theta grid every step;
    holding a strong reference to the key array keeps its id stable.
    """

    def __init__(self, fn, slots: int = 8):
        self.fn = fn
        self.slots = slots
        self._keys: list = []
        self._vals: list = []

    def __call__(self, theta):
        if isinstance(theta, np.ndarray) and not theta.flags.writeable:
            for key, val in zip(self._keys, self._vals):
                if key is theta:
                    return val
            val = self.fn(theta)
            self._keys.append(theta)
            self._vals.append(val)
            if len(self._keys) > self.slots:
                self._keys.pop(0)
                self._vals.pop(0)
            return val
        return self.fn(theta)


@dataclass(frozen=True)
class SphereFunction:
    """Positive axisymmetric function of an angle, vectorised over numpy."""

    fn: Callable
    description: str = "callable"
    source: Optional[str] = None  # expression text when built from one

    def __call__(self, theta):
        return self.fn(np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta))

    def memoized_on_grids(self) -> "SphereFunction":
        """Copy whose values are cached on the shared immutable grids."""
        return SphereFunction(_GridMemo(self.fn), description=self.description,
                              source=self.source)

    @staticmethod
    def constant(c: float) -> "SphereFunction":
        c = float(c)
        if c <= 0:
            raise DataError("sphere function must be positive")
        # scalar return broadcasts wherever it is used
        return SphereFunction(lambda th: c, description=repr(c), source=repr(c))

    @staticmethod
    def from_expression(text: str) -> "SphereFunction":
        node = parse_expression(text)
        extra = node.variables() - {"theta"}
        if extra:
            raise DataError(f"sphere function may only depend on theta, got {sorted(extra)}")
        return SphereFunction(lambda th: expressions.evaluate(node, theta=th),
                              description=text, source=text)

    @staticmethod
    def from_fourier(cos_coeffs, sin_coeffs=()) -> "SphereFunction":
        """sum_j a_j cos(j theta) + sum_j b_j sin(j theta), j from 0 resp. 1."""
        a = np.asarray(cos_coeffs, dtype=float)
        b = np.asarray(sin_coeffs, dtype=float)

        def fn(th):
            th_arr = np.atleast_1d(np.asarray(th, dtype=float))
            out = np.zeros_like(th_arr)
            for j, aj in enumerate(a):
                out += aj * np.cos(j * th_arr)
            for j, bj in enumerate(b, start=1):
                out += bj * np.sin(j * th_arr)
            return out if np.ndim(th) else float(out[0])

        return SphereFunction(fn, description=f"fourier({len(a)}+{len(b)} modes)")

    @staticmethod
    def from_callable(fn: Callable, description: str = "callable") -> "SphereFunction":
        return SphereFunction(fn, description=description)

    def scaled(self, factor: float) -> "SphereFunction":
        if factor <= 0:
            raise DataError("scale factor must be positive")
        return SphereFunction(lambda th: factor * self.fn(th),
                              description=f"{factor!r}*({self.description})")

    def reciprocal(self) -> "SphereFunction":
        return SphereFunction(lambda th: 1.0 / self.fn(th),
                              description=f"1/({self.description})")

    def bounds(self, lo=-np.pi, hi=np.pi, samples=2048) -> tuple[float, float]:
        vals = self(np.linspace(lo, hi, samples, endpoint=False))
        vmin, vmax = float(np.min(vals)), float(np.max(vals))
        if vmin <= 0:
            raise DataError("sphere function is not positive on its domain grid")
        return vmin, vmax


def _as_sphere_function(phi) -> SphereFunction:
    if isinstance(phi, SphereFunction):
        return phi
    if isinstance(phi, (int, float)):
        return SphereFunction.constant(phi)
    if isinstance(phi, str):
        return SphereFunction.from_expression(phi)
    if callable(phi):
        return SphereFunction.from_callable(phi)
    raise DataError(f"cannot interpret {phi!r} as a sphere function")


# ---------------------------------------------------------------------------
# prescribed data
# ---------------------------------------------------------------------------

POWER_LAW = "power_law"
CURVATURE_MEASURE = "curvature_measure"
DUAL_MINKOWSKI = "dual_minkowski"
LP_ALEKSANDROV = "lp_aleksandrov"
EXPRESSION = "expression"

FORMS = (POWER_LAW, CURVATURE_MEASURE, DUAL_MINKOWSKI, LP_ALEKSANDROV, EXPRESSION)


@dataclass(frozen=True)
class PrescribedData:
    """The right-hand side f(s, x, nu) of a prescribed-curvature equation."""

    form: str
    n: int
    q: float = 0.0
    p: float = 0.0
    k: int = 1
    phi: Optional[SphereFunction] = None
    source: Optional[str] = None
    _ast: object = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise DataError(f"unknown data form: {self.form!r}")
        if self.form == EXPRESSION:
            if not self.source:
                raise DataError("expression data needs source text")
            object.__setattr__(self, "_ast", parse_expression(self.source))

    @property
    def uses_position(self) -> bool:
        if self.form in (CURVATURE_MEASURE, DUAL_MINKOWSKI, LP_ALEKSANDROV):
            return True
        if self.form == EXPRESSION:
            return "absx" in self._ast.variables()
        return False

    def evaluate(self, s, nu, absx=None, x_angle=None):
        """f at support s, normal angle nu, distance absx (angle of x optional).

        Raises DataError if any value is nonpositive (f must be positive) or
        if a position-dependent family is evaluated without absx.
        """
        s = np.asarray(s, dtype=float) if np.ndim(s) else float(s)
        if not np.min(s) > 0:
            raise DataError("support must be positive when evaluating f")
        if self.uses_position and absx is None:
            raise DataError(f"{self.form} data needs the position (absx)")
        if self.form == POWER_LAW:
            val = s ** (1.0 - self.q) * self.phi(nu)
        elif self.form == CURVATURE_MEASURE:
            ang = x_angle if x_angle is not None else nu
            val = (s**self.p * np.asarray(absx, dtype=float) ** (-(self.n + 1))
                   * self.phi(ang)) ** (1.0 / self.k)
        elif self.form == DUAL_MINKOWSKI:
            val = (s * np.asarray(absx, dtype=float) ** (self.q - self.n - 1)
                   * self.phi(nu)) ** (1.0 / self.k)
        elif self.form == LP_ALEKSANDROV:
            val = (s ** (1.0 - self.p) * np.asarray(absx, dtype=float) ** (-(self.n + 1))
                   * self.phi(nu)) ** (1.0 / self.k)
        else:
            val = expressions.evaluate(self._ast, theta=nu, s=s, absx=absx)
        vmin, vmax = np.min(val), np.max(val)
        if not (vmin > 0 and np.isfinite(vmax)):
            raise DataError("prescribed f must be positive and finite")
        return val

    def partials(self, s, nu, absx=None, x_angle=None, h=1e-6):
        """(f_s, f_absx, f_nu) by central finite differences."""
        def f(ss, ax, nn):
            return self.evaluate(ss, nn, absx=ax, x_angle=x_angle)

        f_s = (f(s + h, absx, nu) - f(s - h, absx, nu)) / (2 * h)
        if absx is None:
            f_a = np.zeros_like(np.asarray(s, dtype=float))
        else:
            f_a = (f(s, absx + h, nu) - f(s, absx - h, nu)) / (2 * h)
        f_n = (f(s, absx, nu + h) - f(s, absx, nu - h)) / (2 * h)
        return f_s, f_a, f_n

    def slice_bounds(self, space: SpaceformConfig, r: float, samples=512):
        """(inf, sup) of f over the slice of radius r (s = theta(r), |x| = r)."""
        th, _ = warping_values(space.kind, r)
        ang = np.linspace(-np.pi, np.pi, samples, endpoint=False)
        vals = self.evaluate(float(th), ang, absx=float(r), x_angle=ang)
        vals = np.broadcast_to(np.asarray(vals, dtype=float), ang.shape)
        return float(np.min(vals)), float(np.max(vals))

    def describe(self) -> dict:
        d = {"form": self.form, "n": self.n}
        if self.form == POWER_LAW:
            d.update(q=self.q, phi=self.phi.description)
        elif self.form in (CURVATURE_MEASURE, LP_ALEKSANDROV):
            d.update(p=self.p, k=self.k, phi=self.phi.description)
        elif self.form == DUAL_MINKOWSKI:
            d.update(q=self.q, k=self.k, phi=self.phi.description)
        else:
            d.update(source=self.source)
        return d


def eval_f(data: PrescribedData, s, x, nu):
    """Spec-order wrapper: x is None, a distance, or meridian coordinates."""
    absx = x_angle = None
    if x is not None:
        arr = np.asarray(x, dtype=float)
        if arr.ndim >= 1 and arr.shape[-1] == 2:
            absx = np.hypot(arr[..., 0], arr[..., 1])
            x_angle = np.arctan2(arr[..., 1], arr[..., 0])
        else:
            absx = arr
    return data.evaluate(s, nu, absx=absx, x_angle=x_angle)


def power_law(q: float, phi, n: int) -> PrescribedData:
    return PrescribedData(POWER_LAW, n, q=float(q), phi=_as_sphere_function(phi))


def curvature_measure(p: float, k: int, phi, n: int) -> PrescribedData:
    return PrescribedData(CURVATURE_MEASURE, n, p=float(p), k=int(k),
                          phi=_as_sphere_function(phi))


def dual_minkowski(q: float, k: int, phi, n: int) -> PrescribedData:
    return PrescribedData(DUAL_MINKOWSKI, n, q=float(q), k=int(k),
                          phi=_as_sphere_function(phi))


def lp_aleksandrov(p: float, k: int, phi, n: int) -> PrescribedData:
    return PrescribedData(LP_ALEKSANDROV, n, p=float(p), k=int(k),
                          phi=_as_sphere_function(phi))


def expression_data(source: str, n: int) -> PrescribedData:
    return PrescribedData(EXPRESSION, n, source=source)


# ---------------------------------------------------------------------------
# admissibility: strict position concavity of -1/f
# ---------------------------------------------------------------------------


@dataclass
class ConditionVerdict:
    holds: bool
    margin: float
    detail: str = ""


def check_position_concavity(data: PrescribedData, space: SpaceformConfig,
                             grid=(16, 24)) -> ConditionVerdict:
    """Strict negativity of D^2(-1/f) + K_N (-1/f) g over the annulus.

    The Hessian is taken in the ambient position x only; at every grid point
    the support is frozen to the slice value theta(r) and the normal to the
    position direction.  Entries are formed in the orthonormal frame
    (radial, meridian-tangential) of the warped metric by central finite
    differences.  Verdict holds iff the largest eigenvalue stays below
    -1e-10 at every sampled point.
    """
    a, b = space.annulus
    h_r = 1e-4 * (b - a)
    h_a = 1e-4 * np.pi
    nr, na = grid
    r_nodes = np.linspace(a + 2 * h_r, b - 2 * h_r, nr)
    a_nodes = np.linspace(-np.pi, np.pi, na, endpoint=False)

    worst = -np.inf
    worst_at = (float("nan"), float("nan"))
    for r0 in r_nodes:
        th0, thp0 = warping_values(space.kind, r0)
        s0 = float(th0)

        def u(r, alpha, _s0=s0):
            # phi = -1/f with (s, nu) frozen pointwise
            return -1.0 / data.evaluate(_s0, alpha_center, absx=r, x_angle=alpha)

        for alpha_center in a_nodes:
            u0 = u(r0, alpha_center)
            u_rp = u(r0 + h_r, alpha_center)
            u_rm = u(r0 - h_r, alpha_center)
            u_ap = u(r0, alpha_center + h_a)
            u_am = u(r0, alpha_center - h_a)
            u_pp = u(r0 + h_r, alpha_center + h_a)
            u_pm = u(r0 + h_r, alpha_center - h_a)
            u_mp = u(r0 - h_r, alpha_center + h_a)
            u_mm = u(r0 - h_r, alpha_center - h_a)

            du_r = (u_rp - u_rm) / (2 * h_r)
            du_a = (u_ap - u_am) / (2 * h_a)
            d2_rr = (u_rp - 2 * u0 + u_rm) / h_r**2
            d2_aa = (u_ap - 2 * u0 + u_am) / h_a**2
            d2_ra = (u_pp - u_pm - u_mp + u_mm) / (4 * h_r * h_a)

            H_rr = d2_rr
            H_aa = d2_aa / th0**2 + (thp0 / th0) * du_r
            H_ra = (d2_ra - (thp0 / th0) * du_a) / th0
            mat = np.array([[H_rr, H_ra], [H_ra, H_aa]])
            mat += space.K_N * u0 * np.eye(2)
            lam = float(np.max(np.linalg.eigvalsh(mat)))
            if lam > worst:
                worst = lam
                worst_at = (float(r0), float(alpha_center))

    return ConditionVerdict(
        holds=worst < -1e-10,
        margin=worst,
        detail=f"max eigenvalue {worst:.3e} at (r, alpha) = {worst_at}",
    )


# ---------------------------------------------------------------------------
# spherical Hessian (Guan-Ma type) conditions
# ---------------------------------------------------------------------------

GUANMA_VARIANTS = ("i", "ii", "desitter")


def check_guanma(phi, q: float, variant: str = "i", grid: int = 256) -> ConditionVerdict:
    """Axisymmetric spherical Hessian condition on u = phi^(1/q).

    variant "i":        u'' + u > 0
    variant "ii":       u'' + ((q-1)/q) u > 0
    variant "desitter": u - u'' > 0

    u'' is evaluated spectrally on the latitude grid.  The verdict is scale
    invariant: scaling phi by lambda scales the tested operator by
    lambda^(1/q).
    """
    if q == 0:
        raise DomainError("exponent q must be nonzero")
    if variant not in GUANMA_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {GUANMA_VARIANTS}")
    phi = _as_sphere_function(phi)
    th = theta_grid(LATITUDE, grid)
    u = np.broadcast_to(np.asarray(phi(th), dtype=float), th.shape) ** (1.0 / q)
    if np.any(~np.isfinite(u)) or np.any(u <= 0):
        raise DataError("phi must be positive on the latitude grid")
    _, upp = spectral_derivatives(u, LATITUDE)
    if variant == "i":
        op = upp + u
    elif variant == "ii":
        op = upp + (q - 1.0) / q * u
    else:
        op = u - upp
    margin = float(np.min(op))
    return ConditionVerdict(holds=margin > 1e-10, margin=margin,
                            detail=f"variant {variant}, grid {grid}")


def check_firey_p(psi, p: float, k: int, grid: int = 256) -> ConditionVerdict:
    """Sufficient condition for the p > 1 prescribed-radii problem.

    Tests D^2(psi^(-1/(p+k-1))) + psi^(-1/(p+k-1)) g > 0 by applying the
    unit-coefficient spherical Hessian check to 1/psi with exponent p+k-1.
    """
    if p <= 1:
        raise DomainError("this condition is for p > 1")
    return check_guanma(_as_sphere_function(psi).reciprocal(), q=p + k - 1.0,
                        variant="i", grid=grid)


# ---------------------------------------------------------------------------
# Firey ring integral and conditions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _leggauss(nodes=64):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def _gl(fn, a, b, max_panel=0.35):
    """Composite 64-node Gauss-Legendre integral of fn over [a, b]."""
    if b <= a:
        return 0.0
    x, w = _leggauss()
    n_panels = max(1, int(np.ceil((b - a) / max_panel)))
    edges = np.linspace(a, b, n_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        total += half * float(np.sum(w * fn(mid + half * x)))
    return total


def ring_integral(psi, n: int, theta: float) -> float:
    """I(theta) = integral_theta^{pi/2} psi(a) cos^(n-1)(a) sin(a) da.

    Negative latitudes are split into an odd part over [0, |theta|] (which
    vanishes identically for even psi) plus I(|theta|); near the pole the
    integral is taken in the u = cos(a) variable so the overall quotient
    G = psi - (n-k) I / cos^n remains accurate as cos(theta) -> 0.
    """
    theta = float(theta)
    if theta < 0.0:
        odd = _gl(lambda a: np.cos(a) ** (n - 1) * np.sin(a) * (psi(a) - psi(-a)),
                  0.0, -theta)
        return odd + ring_integral(psi, n, -theta)
    if theta >= _POLE_SPLIT:
        c = np.cos(theta)
        return _gl(lambda u: psi(np.arccos(u)) * u ** (n - 1), 0.0, c, max_panel=0.5)
    bulk = _gl(lambda a: np.cos(a) ** (n - 1) * np.sin(a) * psi(a), theta, _POLE_SPLIT)
    tail = _gl(lambda u: psi(np.arccos(u)) * u ** (n - 1), 0.0, float(np.cos(_POLE_SPLIT)),
               max_panel=0.5)
    return bulk + tail


def firey_G(psi, n: int, k: int, theta_values) -> np.ndarray:
    """G(theta) = psi(theta) - (n-k) cos^-n(theta) I(theta) on the given grid."""
    if not 1 <= k < n:
        raise DomainError("firey_G requires 1 <= k < n")
    psi = psi if callable(psi) else _as_sphere_function(psi)
    theta_values = np.atleast_1d(np.asarray(theta_values, dtype=float))
    if np.any(np.abs(theta_values) >= np.pi / 2):
        raise DomainError("firey_G is defined on the open interval (-pi/2, pi/2)")
    out = np.empty_like(theta_values)
    for i, th in enumerate(theta_values):
        I = ring_integral(psi, n, th)
        out[i] = psi(th) - (n - k) * I / np.cos(th) ** n
    return out


@dataclass
class FireyReport:
    finite_limits: ConditionVerdict
    integral_positive: ConditionVerdict
    indicator_positive: ConditionVerdict

    def all_hold(self) -> bool:
        return (self.finite_limits.holds and self.integral_positive.holds
                and self.indicator_positive.holds)


def check_firey(psi, n: int, k: int, grid: int = 256) -> FireyReport:
    """The three classical admissibility conditions for axisymmetric psi.

    (i) finite limits at the poles (checked by grid extrapolation),
    (ii) I(theta) > 0 for theta > -pi/2 with I(-pi/2) = 0 to quadrature
    tolerance, (iii) G(theta) > 0 on the grid.
    """
    if not 1 <= k < n:
        raise DomainError("check_firey requires 1 <= k < n")
    psi = psi if callable(psi) else _as_sphere_function(psi)

    # (i) pole limits by Cauchy differences of a dyadic approach
    offsets = 2.0 ** -np.arange(4, 17)
    worst_diff = 0.0
    scale = 1.0
    for sign in (+1.0, -1.0):
        vals = np.array([psi(sign * (np.pi / 2 - o)) for o in offsets], dtype=float)
        worst_diff = max(worst_diff, float(np.abs(np.diff(vals)[-1])))
        scale = max(scale, float(np.abs(vals[-1])))
    v1 = ConditionVerdict(holds=worst_diff < 1e-6 * scale, margin=worst_diff,
                          detail="last dyadic difference near the poles")

    th = theta_grid(LATITUDE, grid)
    I_vals = np.array([ring_integral(psi, n, t) for t in th])
    I_scale = max(1.0, float(np.max(np.abs(I_vals))))
    I_south = ring_integral(psi, n, -np.pi / 2)
    pos_margin = float(np.min(I_vals))
    v2 = ConditionVerdict(
        holds=pos_margin > 0.0 and abs(I_south) <= 1e-10 * I_scale,
        margin=min(pos_margin, -abs(I_south)) if abs(I_south) > 1e-10 * I_scale else pos_margin,
        detail=f"min I = {pos_margin:.3e}, I(-pi/2) = {I_south:.3e}",
    )

    G = firey_G(psi, n, k, th)
    v3 = ConditionVerdict(holds=float(np.min(G)) > 1e-10, margin=float(np.min(G)),
                          detail="min G over the latitude grid")
    return FireyReport(v1, v2, v3)
