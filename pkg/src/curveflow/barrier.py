"""Spherical (slice) barriers for prescribed-curvature problems.

A slice {r} x S^n has all principal curvatures equal to theta'/theta, so a
normalized curvature function evaluates to n theta'/theta there.  With the
signature sigma of the ambient, the slice is

    a lower barrier  iff  sigma (f - F) >= 0 on it,
    an upper barrier iff  sigma (f - F) <= 0 on it.

When f genuinely varies over a slice the checks use inf f on the side that
must stay nonnegative and sup f on the other, so accepted barriers are
honest for the whole slice (the surrogate used is recorded).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BarrierError, DomainError
from .spaceform import DESITTER, SPHERE, SpaceformConfig, warping_values

BISECT_TOL = 1e-12
BISECT_MAX = 200
NUDGE = 1e-6  # fraction of the annulus width barriers are pulled inward


@dataclass(frozen=True)
class BarrierPair:
    """Bracketing slice radii with their sigma-adjusted margins."""

    r_lower: float
    r_upper: float
    margins: tuple[float, float]  # (min sigma(f-F) at r_lower, max sigma(f-F) at r_upper)
    surrogate: str = ""

    def __post_init__(self):
        if not self.r_lower < self.r_upper:
            raise BarrierError(
                f"barriers must be ordered, got ({self.r_lower}, {self.r_upper})"
            )


def slice_margins(space: SpaceformConfig, data, n: int, r: float) -> tuple[float, float]:
    """(worst lower margin, worst upper margin) of the slice at radius r."""
    th, thp = warping_values(space.kind, float(r))
    F_slice = n * thp / th
    f_lo, f_hi = data.slice_bounds(space, float(r))
    if space.sigma == 1:
        return f_lo - F_slice, f_hi - F_slice
    return F_slice - f_hi, F_slice - f_lo


def _locate(space, data, n, which: str) -> float:
    """Radius whose slice is a barrier of the requested side."""
    a, b = space.annulus
    delta = NUDGE * (b - a)

    def margin(r):
        lo, up = slice_margins(space, data, n, r)
        return lo if which == "lower" else up

    good = (lambda v: v >= 0.0) if which == "lower" else (lambda v: v <= 0.0)
    anchor = a if which == "lower" else b
    inward = delta if which == "lower" else -delta
    if good(margin(anchor)):
        nudged = anchor + inward
        return nudged if good(margin(nudged)) else anchor

    # the natural end fails: scan the annulus for the barrier region
    rs = np.linspace(a, b, 129)
    flags = [good(margin(r)) for r in rs]
    if not any(flags):
        raise BarrierError(
            f"no {which} barrier slice exists in the annulus ({a}, {b}); "
            "the problem is rejected"
        )
    if which == "lower":
        i = flags.index(True)
        bad, ok = rs[i - 1], rs[i]
    else:
        i = len(flags) - 1 - flags[::-1].index(True)
        bad, ok = rs[i + 1], rs[i]
    # bisect the sign change, then step into the good side
    for _ in range(BISECT_MAX):
        mid = 0.5 * (bad + ok)
        if good(margin(mid)):
            ok = mid
        else:
            bad = mid
        if abs(ok - bad) < BISECT_TOL:
            break
    toward_good = np.sign(ok - bad) * delta
    cand = ok + toward_good
    if a <= cand <= b and good(margin(cand)):
        return float(cand)
    return float(ok)


def find_spherical_barriers(problem) -> BarrierPair:
    """Locate a lower/upper barrier pair among the slices of the annulus.

    ``problem`` provides .space, .data and .n.  Raises BarrierError when no
    admissible pair exists (no sign change of the slice margin).
    """
    space, data, n = problem.space, problem.data, problem.n
    r_lower = _locate(space, data, n, "lower")
    r_upper = _locate(space, data, n, "upper")
    if not r_lower < r_upper:
        raise BarrierError(
            f"barrier radii are not ordered: lower {r_lower} >= upper {r_upper}"
        )
    lo_m, _ = slice_margins(space, data, n, r_lower)
    _, up_m = slice_margins(space, data, n, r_upper)
    surrogate = ("slice f-range surrogate: inf f at the lower barrier, sup f at the upper"
                 if space.sigma == 1 else
                 "slice f-range surrogate: sup f at the lower barrier, inf f at the upper")
    return BarrierPair(float(r_lower), float(r_upper), (float(lo_m), float(up_m)),
                       surrogate=surrogate)


def admissible_constant(space: SpaceformConfig, phi_bounds, q: float,
                        anchor_radius: float, n: int) -> float:
    """Largest constant c so that c * s^(1-q) * phi admits the slice barrier.

    Round hemisphere (anchor at the outer radius b):
        c_max = n cos(b) / (sup phi * sin(b)^(2-q)),    requires q > 2
    de Sitter (anchor at the inner radius a):
        c_max = n sinh(a) / (sup phi * cosh(a)^(2-q)),  requires q < 1

    The q-ranges are what make the opposite barrier available in the limit
    (r -> 0 on the hemisphere, r -> infinity in de Sitter).
    """
    try:
        phi_sup = float(max(phi_bounds))
    except TypeError:
        phi_sup = float(phi_bounds)
    if phi_sup <= 0 or not np.isfinite(phi_sup):
        raise DomainError("sup phi must be positive and finite")
    space.require_inside(anchor_radius)
    r = float(anchor_radius)
    if space.kind == SPHERE:
        if q <= 2:
            raise DomainError(
                f"q = {q} rejected on the hemisphere: the inner-barrier limit "
                "needs q > 2"
            )
        return n * np.cos(r) / (phi_sup * np.sin(r) ** (2.0 - q))
    if space.kind == DESITTER:
        if q >= 1:
            raise DomainError(
                f"q = {q} rejected in de Sitter: the outer-barrier limit "
                "needs q < 1"
            )
        return n * np.sinh(r) / (phi_sup * np.cosh(r) ** (2.0 - q))
    raise DomainError(
        "admissible_constant applies to the hemisphere and de Sitter only"
    )


def validate_barrier(problem, candidate, side: str) -> float:
    """Worst sigma-adjusted margin of a candidate barrier.

    ``candidate`` may be a slice radius (float) or a profile.  For side
    "lower" the minimum of sigma(f - F) over nodes is returned (should be
    >= 0); for "upper" the maximum (should be <= 0).
    """
    if side not in ("lower", "upper"):
        raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")
    if isinstance(candidate, (int, float)):
        lo, up = slice_margins(problem.space, problem.data, problem.n, float(candidate))
        return lo if side == "lower" else up
    from .verify import surface_fields  # shared geometric evaluation

    fields = surface_fields(candidate, problem.F, problem.data)
    g = problem.space.sigma * (fields.f - fields.F)
    return float(np.min(g)) if side == "lower" else float(np.max(g))
