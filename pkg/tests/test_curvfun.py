import numpy as np
import pytest

import curveflow as cf
from curveflow.curvfun import sample_cone

from conftest import fd_gradient_oracle

FAMILIES = [cf.mean(3), cf.power_mean(2, 3), cf.power_mean(3, 5),
            cf.quotient(2, 1, 3), cf.quotient(3, 2, 4), cf.gauss(2), cf.gauss(4)]


class SoftMin:
    """n * (mean of kappa^-8)^(-1/8): a smoothed minimum, monotone and
    1-homogeneous but not inverse concave (its dual is the 8-power mean)."""

    def __init__(self, n):
        self.n = n
        self.family = "softmin"
        self.name = f"softmin(n={n})"

    def evaluate(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        return self.n * np.mean(kappa**-8.0, axis=-1) ** (-1.0 / 8.0)

    def dual(self):
        outer = self

        class _Dual:
            n = outer.n

            def evaluate(self, radii):
                radii = np.asarray(radii, dtype=float)
                return np.mean(radii**8.0, axis=-1) ** (1.0 / 8.0) / outer.n

        return _Dual()


def test_normalization_and_hand_values():
    assert cf.power_mean(2, 3).evaluate([1, 1, 1]) == pytest.approx(3.0, abs=1e-12)
    # sigma_2(1,2,3) = 2 + 3 + 6 = 11
    assert cf.power_mean(2, 3).evaluate([1, 2, 3]) == pytest.approx(
        3 * np.sqrt(11 / 3), rel=1e-14)
    assert cf.quotient(2, 1, 3).evaluate([1, 1, 1]) == pytest.approx(3.0, abs=1e-12)
    for F in FAMILIES:
        assert F.evaluate(np.ones(F.n)) == pytest.approx(F.n, abs=1e-12)


def test_cone_domain_errors():
    F = cf.power_mean(2, 3)
    with pytest.raises(cf.DomainError):
        F.evaluate([1.0, -1.0, 2.0])
    with pytest.raises(cf.DomainError):
        F.gradient([0.0, 1.0, 1.0])
    with pytest.raises(cf.DomainError):
        F.evaluate([1.0, 1.0])  # wrong dimension


def test_homogeneity():
    rng = np.random.default_rng(0)
    for F in FAMILIES:
        pts = sample_cone(F.n, 1000, rng)
        base = F.evaluate(pts)
        for lam in (1e-3, 1.0, 1e3):
            scaled = F.evaluate(lam * pts)
            assert np.max(np.abs(scaled - lam * base) / (lam * base)) < 1e-12


def test_euler_identity():
    rng = np.random.default_rng(1)
    for F in FAMILIES:
        pts = sample_cone(F.n, 1000, rng)
        lhs = np.sum(F.gradient(pts) * pts, axis=-1)
        rhs = F.evaluate(pts)
        assert np.max(np.abs(lhs - rhs) / rhs) < 1e-10


def test_gradient_positive_on_cone():
    rng = np.random.default_rng(2)
    for F in FAMILIES:
        pts = sample_cone(F.n, 1000, rng)
        assert np.all(F.gradient(pts) > 0)


def test_mean_gradient_is_ones():
    g = cf.mean(4).gradient([0.3, 1.0, 2.5, 7.0])
    assert np.max(np.abs(g - 1.0)) < 1e-14


def test_gauss_gradient_closed_form():
    F = cf.gauss(2)  # 2 sqrt(ab)
    a, b = 0.7, 2.9
    g = F.gradient([a, b])
    assert g[0] == pytest.approx(np.sqrt(b / a), rel=1e-13)
    assert g[1] == pytest.approx(np.sqrt(a / b), rel=1e-13)
    assert F.gradient([b, a])[0] == pytest.approx(g[1], rel=1e-13)


def test_gradient_matches_high_precision_differences():
    # noise-free oracle: mpmath central differences with relative step 1e-5
    rng = np.random.default_rng(5)
    for F in (cf.power_mean(2, 3), cf.quotient(2, 1, 3), cf.gauss(2)):
        pts = sample_cone(F.n, 40, rng)
        for p in pts:
            fd = fd_gradient_oracle(F, p)
            rel = np.abs(F.gradient(p) - fd) / np.abs(fd)
            assert np.max(rel) < 1e-8


def test_gradient_point_example_against_float_differences():
    F = cf.power_mean(2, 3)
    p = np.array([1.0, 2.0, 3.0])
    fd = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1e-5
        fd[i] = (F.evaluate(p + e) - F.evaluate(p - e)) / 2e-5
    assert np.max(np.abs(F.gradient(p) - fd) / np.abs(fd)) < 1e-8


def test_dual_values_and_involution():
    assert cf.mean(2).dual().evaluate([1.0, 3.0]) == pytest.approx(0.75, rel=1e-14)
    rng = np.random.default_rng(4)
    for F in FAMILIES:
        dual = F.dual()
        assert dual.dual() is F
        assert dual.evaluate(np.ones(F.n)) == pytest.approx(1.0 / F.n, rel=1e-12)
        pts = sample_cone(F.n, 1000, rng)
        direct = dual.evaluate(pts)
        via_def = 1.0 / F.evaluate(1.0 / pts)
        assert np.max(np.abs(direct - via_def)) == 0.0
        # involution through the wrapper arithmetic
        again = dual.dual().evaluate(pts)
        assert np.max(np.abs(again - F.evaluate(pts)) / again) < 1e-12


def test_dual_gradient_matches_differences():
    F = cf.power_mean(2, 3)
    dual = F.dual()
    rng = np.random.default_rng(6)
    pts = sample_cone(3, 50, rng, low=0.1, high=10.0)
    g = dual.gradient(pts)
    for i in range(3):
        h = 1e-6 * pts[:, i]
        e = np.zeros_like(pts)
        e[:, i] = h
        fd = (dual.evaluate(pts + e) - dual.evaluate(pts - e)) / (2 * h)
        assert np.max(np.abs(g[:, i] - fd) / np.abs(fd)) < 1e-7


def test_inverse_concavity_verdicts():
    assert cf.check_inverse_concave(cf.power_mean(2, 3), 10_000, seed=1).holds
    assert cf.check_inverse_concave(cf.power_mean(3, 4), 10_000, seed=1).holds
    assert cf.check_inverse_concave(cf.quotient(2, 1, 3), 10_000, seed=1).holds
    assert cf.check_inverse_concave(cf.quotient(3, 2, 4), 10_000, seed=1).holds
    bad = cf.check_inverse_concave(SoftMin(3), 10_000, seed=1)
    assert not bad.holds
    assert bad.margin < -1e-6


def test_concavity_verdicts():
    assert cf.check_concave(cf.power_mean(2, 3), 5000, seed=2).holds
    assert cf.check_concave(cf.quotient(2, 1, 3), 5000, seed=2).holds


def test_dual_boundary_classification():
    # k-th root families vanish on the cone boundary
    for F in (cf.mean(3), cf.power_mean(2, 3), cf.power_mean(3, 5), cf.gauss(4)):
        assert cf.check_dual_boundary(F).holds
    # quotients keep a positive limit; the top-quotient class is the
    # canonical example
    for F in (cf.quotient(3, 2, 3), cf.quotient(3, 1, 3), cf.quotient(5, 3, 5),
              cf.quotient(2, 1, 3)):
        v = cf.check_dual_boundary(F)
        assert not v.holds
        assert v.margin > 1e-3


def test_lambda_eps_quotients_hold_with_known_gamma():
    rep = cf.check_lambda_eps(cf.quotient(2, 1, 3), 0.1, sample_count=10_000, seed=2)
    assert rep.classified and rep.holds
    assert rep.gamma == 2.0
    assert rep.fitted_C <= rep.theoretical_C  # the constructive bound is honest


def test_lambda_eps_symmetric_point_trivial():
    F = cf.quotient(2, 1, 3)
    ones = np.ones(3)
    growth = np.max(F.gradient(ones) * ones**2)
    theo = cf.curvfun.lambda_eps_constant(F, 0.1)
    assert growth <= theo * F.evaluate(ones) ** 2


def test_lambda_eps_mean_exact_constant():
    rep = cf.check_lambda_eps(cf.mean(4), 0.1, sample_count=10_000, seed=3)
    assert rep.classified and rep.holds
    assert rep.gamma == 2.0
    assert rep.theoretical_C == 1.0
    assert rep.fitted_C <= 1.0 + 1e-12


def test_lambda_eps_unclassified_families_report_fit():
    rep = cf.check_lambda_eps(cf.gauss(3), 0.1, sample_count=3000, seed=4)
    assert not rep.classified
    assert rep.theoretical_C is None
    assert np.isfinite(rep.gamma)


def test_structure_report_bundle():
    rep = cf.structure_report(cf.quotient(2, 1, 3), sample_count=3000, eps=0.1, seed=0)
    assert rep.inverse_concave.holds
    assert rep.concave.holds
    assert not rep.dual_vanishes_on_boundary.holds
    assert rep.lambda_eps.holds
    assert rep.samples_used == 3000
