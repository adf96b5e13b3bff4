import numpy as np
import pytest

import curveflow as cf

from conftest import power_law_problem


def test_flat_power_law_barriers_and_margins():
    prob = power_law_problem(q=3.0, phi=1.0, annulus=(0.5, 2.0))
    bars = prob.barriers
    width = 1.5
    assert bars.r_lower == pytest.approx(0.5 + 1e-6 * width, abs=1e-12)
    assert bars.r_upper == pytest.approx(2.0 - 1e-6 * width, abs=1e-12)
    # margins of the raw endpoints: g(r) = r^-2 - r^-1
    lo, _ = cf.slice_margins(prob.space, prob.data, 1, 0.5)
    _, up = cf.slice_margins(prob.space, prob.data, 1, 2.0)
    assert lo == pytest.approx(2.0, rel=1e-12)
    assert up == pytest.approx(-0.25, rel=1e-12)


def test_barrier_search_inside_annulus():
    # lower barrier does not hold at the inner end; bisection finds the edge
    # of the admissible region: r^-2 >= r^-1 iff r <= 1
    prob = power_law_problem(q=3.0, phi=1.0, annulus=(0.5, 2.0))
    space = cf.SpaceformConfig("euclid", (0.9, 2.0))
    probe = __import__("types").SimpleNamespace(space=space, data=prob.data, n=1)
    bars = cf.find_spherical_barriers(probe)
    assert 0.9 <= bars.r_lower < 1.0 < bars.r_upper <= 2.0
    assert bars.margins[0] >= 0.0 and bars.margins[1] <= 0.0


def test_no_barrier_rejection():
    data = cf.power_law(3.0, 1.0, 1)
    probe = __import__("types").SimpleNamespace(
        space=cf.SpaceformConfig("euclid", (2.0, 5.0)), data=data, n=1)
    with pytest.raises(cf.BarrierError):
        cf.find_spherical_barriers(probe)  # g < 0 on the whole annulus


def test_sphere_upper_barrier_from_admissible_constant():
    b = np.pi / 4
    space = cf.SpaceformConfig("sphere", (0.05, b))
    n = 1
    cmax = cf.admissible_constant(space, 1.0, 3.0, b, n)
    data = cf.power_law(3.0, 0.5 * cmax, n)
    _, up = cf.slice_margins(space, data, n, b)
    # with c = c_max/2 the outer slice margin is -n cot(b) / 2
    assert up == pytest.approx(-0.5 * n / np.tan(b), rel=1e-12)
    probe = __import__("types").SimpleNamespace(space=space, data=data, n=n)
    bars = cf.find_spherical_barriers(probe)
    assert bars.margins[0] >= 0.0 >= bars.margins[1]


def test_desitter_lower_barrier_sign():
    # sigma = -1: the slice margin is F - sup f at the lower barrier
    space = cf.SpaceformConfig("desitter", (1.0, 4.0))
    n = 1
    cmax = cf.admissible_constant(space, 1.0, -1.0, 1.0, n)
    data = cf.power_law(-1.0, 0.5 * cmax, n)
    lo, _ = cf.slice_margins(space, data, n, 1.0)
    expect = n * np.tanh(1.0) - 0.5 * cmax * np.cosh(1.0) ** 2
    assert lo == pytest.approx(expect, rel=1e-12)
    assert lo > 0


def test_admissible_constant_reference_values():
    for n in (1, 2, 3):
        sph = cf.SpaceformConfig("sphere", (0.05, np.pi / 4))
        c = cf.admissible_constant(sph, 1.0, 3.0, np.pi / 4, n)
        assert c == pytest.approx(n / 2, abs=1e-12)
        ds = cf.SpaceformConfig("desitter", (1.0, 4.0))
        c = cf.admissible_constant(ds, 1.0, -1.0, 1.0, n)
        assert c == pytest.approx(n * np.sinh(1.0) / np.cosh(1.0) ** 3, abs=1e-12)


def test_admissible_constant_rejections():
    sph = cf.SpaceformConfig("sphere", (0.05, np.pi / 4))
    with pytest.raises(cf.DomainError):
        cf.admissible_constant(sph, 1.0, 2.0, np.pi / 4, 1)  # q = 2 rejected
    ds = cf.SpaceformConfig("desitter", (1.0, 4.0))
    with pytest.raises(cf.DomainError):
        cf.admissible_constant(ds, 1.0, 1.5, 1.0, 1)  # q >= 1 rejected
    with pytest.raises(cf.DomainError):
        cf.admissible_constant(cf.SpaceformConfig("euclid", (0.5, 2.0)), 1.0, 3.0, 1.0, 1)


def test_admissible_constant_inverse_linear_in_sup_phi():
    sph = cf.SpaceformConfig("sphere", (0.05, np.pi / 4))
    c1 = cf.admissible_constant(sph, 1.0, 3.0, np.pi / 4, 2)
    c2 = cf.admissible_constant(sph, 2.0, 3.0, np.pi / 4, 2)
    assert c1 == pytest.approx(2 * c2, rel=1e-14)
    # accepts (inf, sup) bounds and uses the sup
    c3 = cf.admissible_constant(sph, (0.5, 2.0), 3.0, np.pi / 4, 2)
    assert c3 == c2


def test_validate_barrier_round_profiles():
    prob = power_law_problem(q=3.0, phi=1.0, annulus=(0.25, 3.0))
    assert cf.validate_barrier(prob, cf.round_profile(0.5, 64), "lower") \
        == pytest.approx(2.0, rel=1e-12)
    assert abs(cf.validate_barrier(prob, cf.round_profile(1.0, 64), "lower")) < 1e-10
    assert abs(cf.validate_barrier(prob, cf.round_profile(1.0, 64), "upper")) < 1e-10
    assert cf.validate_barrier(prob, cf.round_profile(2.0, 64), "lower") < 0
    # slice radii work too
    assert cf.validate_barrier(prob, 0.5, "lower") == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(cf.DomainError):
        cf.validate_barrier(prob, cf.round_profile(1.0, 64), "sideways")


def test_validate_barrier_requires_convexity():
    prob = power_law_problem(q=3.0, phi=1.0, annulus=(0.25, 3.0))
    th = cf.theta_grid("full_circle", 64)
    bad = cf.SupportProfile(1 + 0.6 * np.cos(2 * th), "full_circle", 1)
    with pytest.raises(cf.ConvexityError):
        cf.validate_barrier(prob, bad, "lower")


def test_bracket_signs_sigma_adjusted():
    prob = power_law_problem(q=3.0, phi="1 + 0.2*cos(2*theta)", annulus=(0.3, 3.0))
    bars = prob.barriers
    assert bars.margins[0] >= 0.0 >= bars.margins[1]
    assert bars.r_lower < bars.r_upper
    assert bars.surrogate  # records which slice bound stood in for f
