import math

import numpy as np
import pytest

import curveflow as cf
from curveflow.anisotropy import SphereFunction, ring_integral

from conftest import random_convex_latitude_profile


# ---------------------------------------------------------------------------
# prescribed data families
# ---------------------------------------------------------------------------


def test_power_law_values_and_scaling():
    data = cf.power_law(3.0, 1.0, n=1)
    assert data.evaluate(2.0, 0.0) == pytest.approx(0.25)
    rng = np.random.default_rng(0)
    phi = SphereFunction.from_expression("1 + 0.3*cos(2*theta)")
    data = cf.power_law(2.7, phi, n=1)
    s = rng.uniform(0.5, 3.0, 64)
    nu = rng.uniform(0, 2 * np.pi, 64)
    lam = 4.2
    lhs = data.evaluate(lam * s, nu)
    rhs = lam ** (1 - 2.7) * data.evaluate(s, nu)
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-12


def test_position_weighted_families():
    dm = cf.dual_minkowski(0.0, 1, 1.0, n=2)
    assert dm.evaluate(1.0, 0.0, absx=1.0) == pytest.approx(1.0)
    cm = cf.curvature_measure(1.0, 1, 1.0, n=2)
    assert cm.evaluate(0.8, 0.0, absx=1.25) == pytest.approx(0.8 / 1.25**3, rel=1e-14)
    lp = cf.lp_aleksandrov(2.0, 2, 1.0, n=3)
    # f^k = s^(1-p) |x|^-(n+1): hand arithmetic
    assert lp.evaluate(2.0, 0.0, absx=1.5) == pytest.approx(
        (2.0 ** (-1.0) * 1.5 ** (-4.0)) ** 0.5, rel=1e-14)
    with pytest.raises(cf.DataError):
        cm.evaluate(0.8, 0.0)  # position required


def test_eval_f_wrapper_accepts_meridian_coordinates():
    cm = cf.curvature_measure(1.0, 1, 1.0, n=2)
    x = np.array([[1.25, 0.0]])
    assert cf.eval_f(cm, 0.8, x, 0.0)[0] == pytest.approx(0.8 / 1.25**3, rel=1e-14)


def test_expression_data_and_positivity_error():
    data = cf.expression_data("s^(-2) * (1 + 0.1*sin(theta))", n=1)
    assert data.evaluate(2.0, 0.0) == pytest.approx(0.25)
    bad = cf.expression_data("s - 10", n=1)
    with pytest.raises(cf.DataError):
        bad.evaluate(1.0, 0.0)


def test_partials_match_known_derivatives():
    data = cf.power_law(3.0, 1.0, n=1)
    f_s, f_a, f_n = data.partials(2.0, 0.3)
    assert f_s == pytest.approx(-2 * 2.0 ** (-3.0), rel=1e-6)
    assert f_a == 0.0 and abs(f_n) < 1e-8


def test_slice_bounds():
    phi = SphereFunction.from_expression("1 + 0.5*cos(2*theta)")
    data = cf.power_law(3.0, phi, n=1)
    space = cf.SpaceformConfig("euclid", (0.5, 2.0))
    lo, hi = data.slice_bounds(space, 1.0)
    assert lo == pytest.approx(0.5, abs=1e-4)
    assert hi == pytest.approx(1.5, abs=1e-4)


# ---------------------------------------------------------------------------
# position-concavity condition
# ---------------------------------------------------------------------------


def test_position_concavity_inverse_square():
    # f = |x|^-2 in the flat ambient: -1/f = -|x|^2, Hessian -2 Id
    data = cf.curvature_measure(0.0, 1, 1.0, n=1)
    v = cf.check_position_concavity(data, cf.SpaceformConfig("euclid", (0.5, 2.0)))
    assert v.holds
    assert v.margin == pytest.approx(-2.0, abs=1e-5)


def test_position_concavity_homogeneous_exponent_two():
    # f^k = s^p |x|^-(n+1) with (n+1)/k = 2: 1/f proportional to |x|^2
    data = cf.curvature_measure(1.0, 2, 1.0, n=3)
    v = cf.check_position_concavity(data, cf.SpaceformConfig("euclid", (0.5, 2.0)))
    assert v.holds


def test_position_concavity_constant_on_sphere():
    # K_N = 1 and f = c: the condition reduces to -(1/c) g < 0
    data = cf.power_law(1.0, 2.0, n=1)
    v = cf.check_position_concavity(data, cf.SpaceformConfig("sphere", (0.1, 1.2)))
    assert v.holds
    assert v.margin == pytest.approx(-0.5, abs=1e-5)


def test_position_concavity_fails_without_position_dependence_flat():
    data = cf.power_law(3.0, 1.0, n=1)
    v = cf.check_position_concavity(data, cf.SpaceformConfig("euclid", (0.5, 2.0)))
    assert not v.holds


# ---------------------------------------------------------------------------
# spherical Hessian conditions
# ---------------------------------------------------------------------------


def test_guanma_constant():
    assert cf.check_guanma(1.0, 3.0, "i").holds
    assert cf.check_guanma(1.0, -1.0, "desitter").holds


def test_guanma_cosine_band():
    v = cf.check_guanma("(1 + 0.2*cos(2*theta))^3", 3.0, "i")
    assert v.holds
    # operator is 1 - 0.6 cos(2 theta), minimum 0.4 up to grid placement
    assert v.margin == pytest.approx(0.4, abs=1e-3)
    v = cf.check_guanma("(1 + 0.9*cos(2*theta))^3", 3.0, "i")
    assert not v.holds


def test_guanma_scale_invariance():
    for lam in (0.1, 10.0):
        ok = cf.check_guanma(f"{lam}*(1 + 0.2*cos(2*theta))^3", 3.0, "i")
        bad = cf.check_guanma(f"{lam}*(1 + 0.9*cos(2*theta))^3", 3.0, "i")
        assert ok.holds and not bad.holds


def test_guanma_variant_ii_and_errors():
    v1 = cf.check_guanma(1.0, 3.0, "ii")
    assert v1.holds and v1.margin == pytest.approx(2.0 / 3.0, abs=1e-12)
    with pytest.raises(cf.DomainError):
        cf.check_guanma(1.0, 0.0, "i")
    with pytest.raises(cf.DomainError):
        cf.check_guanma(1.0, 1.0, "bogus")


def test_firey_p_variant():
    # psi == 1: the operator is u'' + u with u == 1
    assert cf.check_firey_p(1.0, 2.0, 2).holds
    with pytest.raises(cf.DomainError):
        cf.check_firey_p(1.0, 0.5, 2)


# ---------------------------------------------------------------------------
# ring integral and its conditions
# ---------------------------------------------------------------------------


def test_ring_integral_constant_closed_form():
    # I(theta) = psi cos^n(theta)/n for constant psi
    n = 3
    for th in (-1.4, -0.7, 0.0, 0.9, 1.5):
        got = ring_integral(lambda a: 2.5, n, th)
        assert got == pytest.approx(2.5 * np.cos(th) ** n / n, rel=1e-13, abs=1e-16)


def test_firey_G_constants():
    n, k = 3, 2
    th = cf.theta_grid("latitude", 128)
    G = cf.firey_G(float(math.comb(n, k)), n, k, th)
    assert np.max(np.abs(G - math.comb(n - 1, k - 1))) < 1e-12
    G = cf.firey_G(5.0, n, k, th)
    assert np.max(np.abs(G - 5.0 * k / n)) < 1e-12


def test_firey_G_matches_radii_product_for_a_body():
    prof = random_convex_latitude_profile(np.random.default_rng(8), M=256)
    assert cf.firey_crosscheck(prof, 3, 2) < 1e-8


def test_check_firey_constant_psi():
    rep = cf.check_firey(1.0, 3, 2)
    assert rep.all_hold()
    assert rep.indicator_positive.margin == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_check_firey_from_convex_body_and_degenerate_body():
    n, k = 3, 2
    prof = random_convex_latitude_profile(np.random.default_rng(9), M=256)
    psi = cf.radii_psi(prof, n, k)
    rep = cf.check_firey(psi, n, k)
    assert rep.indicator_positive.holds
    assert rep.integral_positive.holds

    # s = 1 + a cos(2 theta) with a = 1/3 has s'' + s touching zero at the
    # equator: the indicator vanishes there ...
    th = cf.theta_grid("latitude", 256)
    flat = cf.SupportProfile(1 + (1 / 3) * np.cos(2 * th), "latitude", n=n)
    psi_flat = cf.radii_psi(flat, n, k)
    G0 = cf.firey_G(psi_flat, n, k, np.array([0.0]))[0]
    assert abs(G0) < 1e-7
    # ... and just past the critical amplitude the condition fails outright
    over = cf.SupportProfile(1 + 0.34 * np.cos(2 * th), "latitude", n=n)
    rep = cf.check_firey(cf.radii_psi(over, n, k), n, k)
    assert not rep.indicator_positive.holds
    assert rep.indicator_positive.margin < 0


def test_check_firey_parameter_guards():
    with pytest.raises(cf.DomainError):
        cf.check_firey(1.0, 2, 2)
    with pytest.raises(cf.DomainError):
        cf.firey_G(1.0, 3, 2, [np.pi / 2])
