import numpy as np
import pytest

import curveflow as cf
from curveflow.spaceform import KINDS, warping_values


def test_warping_values_reference_points():
    th, thp = warping_values("sphere", np.pi / 2)
    assert th == pytest.approx(1.0, abs=1e-15)
    assert thp == pytest.approx(0.0, abs=1e-15)
    assert warping_values("euclid", 2.0) == (2.0, 1.0)
    th, thp = warping_values("desitter", 0.0)
    assert (th, thp) == (1.0, 0.0)
    th, thp = warping_values("hyperbolic", 1.0)
    assert th == pytest.approx(np.sinh(1.0))
    assert thp == pytest.approx(np.cosh(1.0))


def test_config_domain_checks():
    cfg = cf.SpaceformConfig("euclid", (0.5, 2.0))
    cf.warping(cfg, 0.5)  # closed endpoints accepted, barriers live there
    cf.warping(cfg, 2.0)
    with pytest.raises(cf.DomainError):
        cf.warping(cfg, 0.4)
    with pytest.raises(cf.DomainError):
        cf.SpaceformConfig("sphere", (0.1, 2.0))  # b >= pi/2
    with pytest.raises(cf.DomainError):
        cf.SpaceformConfig("euclid", (2.0, 1.0))
    with pytest.raises(cf.DomainError):
        cf.SpaceformConfig("nowhere", (0.5, 1.0))


def test_kind_parameters_consistent():
    expected = {"euclid": (0, 1), "sphere": (1, 1), "hyperbolic": (-1, 1),
                "desitter": (1, -1)}
    annuli = {"sphere": (0.1, 1.4), "desitter": (0.5, 2.0)}
    for kind in KINDS:
        cfg = cf.SpaceformConfig(kind, annuli.get(kind, (0.5, 2.0)))
        assert (cfg.K_N, cfg.sigma) == expected[kind]


def test_warping_positive_on_annulus():
    rng = np.random.default_rng(7)
    annuli = {"sphere": (0.05, 1.5), "desitter": (0.2, 3.0)}
    for kind in KINDS:
        a, b = annuli.get(kind, (0.3, 4.0))
        r = rng.uniform(a, b, size=1000)
        th, thp = warping_values(kind, r)
        assert np.all(th > 0) and np.all(thp > 0)


def test_slice_curvature_values():
    assert cf.slice_curvature(cf.SpaceformConfig("sphere", (0.1, 1.5)), np.pi / 4) \
        == pytest.approx(1.0, abs=1e-14)
    assert cf.slice_curvature(cf.SpaceformConfig("euclid", (0.25, 3.0)), 0.5) == 2.0
    hyp = cf.slice_curvature(cf.SpaceformConfig("hyperbolic", (0.5, 2.0)), 1.0)
    assert hyp == pytest.approx(np.cosh(1.0) / np.sinh(1.0), rel=1e-14)


def test_graph_support():
    eu = cf.SpaceformConfig("euclid", (0.25, 3.0))
    sp = cf.SpaceformConfig("sphere", (0.1, 1.5))
    # zero tangential gradient: support equals the warping factor exactly
    for cfg, r in ((eu, 1.3), (sp, 0.7)):
        th, _ = warping_values(cfg.kind, r)
        assert cf.graph_support(cfg, r, 0.0) == th
    assert cf.graph_support(eu, 1.0, 1.0) == pytest.approx(1 / np.sqrt(2), rel=1e-15)
    assert cf.graph_support(sp, np.pi / 4, 0.5) == pytest.approx(0.5, rel=1e-14)


def test_graph_support_spacelike_guard():
    ds = cf.SpaceformConfig("desitter", (0.5, 2.0))
    cf.graph_support(ds, 1.0, 0.5)  # spacelike, fine
    with pytest.raises(cf.DomainError):
        cf.graph_support(ds, 0.5, 5.0)  # 1 - dr/theta^2 <= 0


def test_radial_graph_curvature_slices_and_polar():
    rng = np.random.default_rng(11)
    annuli = {"sphere": (0.05, 1.5)}
    for kind in ("euclid", "sphere", "hyperbolic"):
        cfg = cf.SpaceformConfig(kind, annuli.get(kind, (0.3, 4.0)))
        a, b = cfg.annulus
        r = rng.uniform(a, b, size=1000)
        kappa = cf.radial_graph_curvature(cfg, r, np.zeros_like(r), np.zeros_like(r))
        assert np.max(np.abs(kappa - cf.slice_curvature(cfg, r))) < 1e-12


def test_radial_graph_curvature_euclid_matches_polar_formula():
    eu = cf.SpaceformConfig("euclid", (0.1, 10.0))
    rng = np.random.default_rng(3)
    r = rng.uniform(0.5, 5.0, 500)
    rp = rng.uniform(-2.0, 2.0, 500)
    rpp = rng.uniform(-2.0, 2.0, 500)
    got = cf.radial_graph_curvature(eu, r, rp, rpp)
    polar = (r**2 + 2 * rp**2 - r * rpp) / (r**2 + rp**2) ** 1.5
    assert np.max(np.abs(got - polar)) < 1e-12
    # point cases
    assert cf.radial_graph_curvature(eu, 2.0, 0.0, 0.0) == pytest.approx(0.5)
    assert cf.radial_graph_curvature(eu, 1.0, 0.0, -1.0) == pytest.approx(2.0)


def test_radial_graph_curvature_rejects_desitter():
    ds = cf.SpaceformConfig("desitter", (0.5, 2.0))
    with pytest.raises(cf.DomainError):
        cf.radial_graph_curvature(ds, 1.0, 0.0, 0.0)
