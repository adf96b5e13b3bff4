"""Shared test helpers: high-precision gradient oracle and profile generators."""

import itertools
import math

import mpmath as mp
import numpy as np

import curveflow as cf


def mp_sigma(kappa, p):
    """Elementary symmetric polynomial in exact mpmath arithmetic."""
    if p == 0:
        return mp.mpf(1)
    total = mp.mpf(0)
    for combo in itertools.combinations(kappa, p):
        term = mp.mpf(1)
        for value in combo:
            term *= value
        total += term
    return total


def mp_curvature_value(F, kappa):
    """Family formulas re-evaluated independently in mpmath."""
    n = F.n
    kappa = [mp.mpf(float(v)) for v in kappa]
    if F.family == "power_mean":
        k = F.k
        return n * (mp_sigma(kappa, k) / math.comb(n, k)) ** (mp.mpf(1) / k)
    l, k = F.l, F.k
    return n * (mp_sigma(kappa, l) * math.comb(n, k)
                / (mp_sigma(kappa, k) * math.comb(n, l))) ** (mp.mpf(1) / (l - k))


def fd_gradient_oracle(F, kappa, rel_step=1e-5):
    """Central finite differences at 40 digits; the float64 analytic gradient
    is compared against this, never against itself."""
    with mp.workdps(40):
        out = []
        for i in range(len(kappa)):
            h = mp.mpf(float(kappa[i])) * mp.mpf(rel_step)
            up = list(kappa)
            dn = list(kappa)
            up[i] = mp.mpf(float(kappa[i])) + h
            dn[i] = mp.mpf(float(kappa[i])) - h
            out.append(float((mp_curvature_value(F, up)
                              - mp_curvature_value(F, dn)) / (2 * h)))
    return np.array(out)


def random_convex_latitude_profile(rng, M=256, n=3, radius_floor=0.08):
    """Random strictly convex axisymmetric support function on the latitude
    grid: both principal radii stay above radius_floor (rejection scaling)."""
    th = cf.theta_grid("latitude", M)
    amps = rng.uniform(-1.0, 1.0, size=4)
    shape = (amps[0] * np.cos(2 * th) + amps[1] * np.sin(3 * th)
             + amps[2] * np.cos(4 * th) / 4 + amps[3] * np.sin(5 * th) / 6)
    scale = 0.15
    for _ in range(60):
        prof = cf.SupportProfile(1.0 + scale * shape, "latitude", n=n)
        r1, r2 = cf.principal_radii(prof)
        if min(r1.min(), r2.min()) > radius_floor:
            return prof
        scale *= 0.8
    raise AssertionError("profile generator failed to produce a convex body")


def power_law_problem(q=3.0, phi=1.0, annulus=(0.5, 2.0), family=None, mode="contracting"):
    F = family or cf.mean(1)
    data = cf.power_law(q, phi, F.n)
    space = cf.SpaceformConfig("euclid", annulus)
    return cf.make_problem(space, F, data, mode)
