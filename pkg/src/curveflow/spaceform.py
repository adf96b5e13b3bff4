"""Ambient geometry of the simply connected spaceforms.

Supported ambients are flat space, the round hemisphere, hyperbolic space,
and (for barrier arithmetic only) the Lorentzian de Sitter space.  The
geometry of each is encoded by the radial warping factor of the annular
region (a, b) x S^n:

    flat        theta(r) = r        K_N =  0   sigma = +1
    sphere      theta(r) = sin r    K_N = +1   sigma = +1  (b < pi/2)
    hyperbolic  theta(r) = sinh r   K_N = -1   sigma = +1
    desitter    theta(r) = cosh r   K_N = +1   sigma = -1
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EUCLID = "euclid"
SPHERE = "sphere"
HYPERBOLIC = "hyperbolic"
DESITTER = "desitter"

KINDS = (EUCLID, SPHERE, HYPERBOLIC, DESITTER)

# kind -> (K_N, sigma)
_KIND_PARAMS = {
    EUCLID: (0, 1),
    SPHERE: (1, 1),
    HYPERBOLIC: (-1, 1),
    DESITTER: (1, -1),
}


def warping_values(kind: str, r):
    """Warping factor and its derivative (theta, theta') for a bare kind.

    No annulus check; use SpaceformConfig.warping for the domain-checked call.
    """
    r = np.asarray(r, dtype=float) if np.ndim(r) else float(r)
    if kind == EUCLID:
        return r, np.ones_like(r) if np.ndim(r) else 1.0
    if kind == SPHERE:
        return np.sin(r), np.cos(r)
    if kind == HYPERBOLIC:
        return np.sinh(r), np.cosh(r)
    if kind == DESITTER:
        return np.cosh(r), np.sinh(r)
    raise DomainError(f"unknown spaceform kind: {kind!r}")


@dataclass(frozen=True)
class SpaceformConfig:
    """Ambient choice plus the annular region [a, b] all runs live in.

    The annulus is stored closed; operations accept endpoint values since
    barriers live there.  K_N and sigma are derived from the kind.
    """

    kind: str
    annulus: tuple[float, float]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown spaceform kind: {self.kind!r}")
        a, b = self.annulus
        a, b = float(a), float(b)
        object.__setattr__(self, "annulus", (a, b))
        if not (0.0 < a < b):
            raise DomainError(f"annulus must satisfy 0 < a < b, got ({a}, {b})")
        if self.kind == SPHERE and b >= np.pi / 2:
            raise DomainError(f"sphere annulus requires b < pi/2, got b = {b}")
        # theta > 0 and theta' > 0 must hold on the whole closed annulus;
        # both warping families are monotone so endpoints suffice.
        for r in (a, b):
            th, thp = warping_values(self.kind, r)
            if not (th > 0.0 and thp > 0.0):
                raise DomainError(
                    f"warping positivity fails at r = {r} for kind {self.kind}"
                )

    @property
    def K_N(self) -> int:
        return _KIND_PARAMS[self.kind][0]

    @property
    def sigma(self) -> int:
        return _KIND_PARAMS[self.kind][1]

    def contains(self, r, slack: float = 0.0) -> bool:
        a, b = self.annulus
        return bool(np.all(np.asarray(r) >= a - slack) and np.all(np.asarray(r) <= b + slack))

    def require_inside(self, r):
        if not self.contains(r, slack=1e-12):
            a, b = self.annulus
            raise DomainError(
                f"radius outside annulus [{a}, {b}]: range "
                f"[{np.min(r):.6g}, {np.max(r):.6g}]"
            )


def warping(config: SpaceformConfig, r):
    """(theta(r), theta'(r)) with the annulus domain check."""
    config.require_inside(r)
    return warping_values(config.kind, r)


def slice_curvature(config: SpaceformConfig, r):
    """Principal curvature theta'/theta of the slice {r} x S^n."""
    th, thp = warping(config, r)
    return thp / th


def graph_support(config: SpaceformConfig, r, dr):
    """Support function s = theta/v of a graph point.

    ``dr`` is the squared tangential gradient norm g^{ij} r_i r_j measured
    in the round slice metric.  For sigma = -1 the graph must be spacelike.
    """
    th, _ = warping(config, r)
    arg = 1.0 + config.sigma * dr / th**2
    if np.any(np.asarray(arg) <= 0.0):
        raise DomainError("graph is not spacelike: 1 + sigma*theta^-2*dr <= 0")
    return th / np.sqrt(arg)


def radial_graph_curvature(config: SpaceformConfig, r, rp, rpp):
    """Geodesic curvature of the curve {(r(y), y)}, outward normal. n = 1 only.

    kappa = (theta^2 theta' + 2 theta' r'^2 - theta r'') / (r'^2 + theta^2)^{3/2}

    Constant profiles reduce to the slice curvature theta'/theta, and the
    flat case reduces to the classical polar-graph formula.
    """
    if config.kind == DESITTER:
        raise DomainError("radial_graph_curvature: Lorentzian graphs unsupported")
    config.require_inside(r)
    th, thp = warping_values(config.kind, r)
    rp = np.asarray(rp, dtype=float) if np.ndim(rp) else float(rp)
    rpp = np.asarray(rpp, dtype=float) if np.ndim(rpp) else float(rpp)
    w2 = rp**2 + th**2
    return (th**2 * thp + 2.0 * thp * rp**2 - th * rpp) / w2**1.5
