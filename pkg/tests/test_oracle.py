import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_opinion import oracle as O
from graphon_opinion.control import kappa_general, kappa_separable, label_grid, WeightedStats
from graphon_opinion.errors import DomainError
from graphon_opinion.graphon import ConstantGraphon, PowerLawGraphon, truncate

import frozen

LAMS = [1 / 8, 1 / 4, 1 / 2, 1.0]
RATIOS = [-0.5, 0.0, 0.5]


def test_beta_equilibrium_example():
    q = O.beta_equilibrium(0.25, 0.0)
    assert (q.alpha_minus, q.alpha_plus) == (3.0, 3.0)
    assert q.density(0.0) == pytest.approx(frozen.BETA_L4_DENSITY_AT_0, rel=1e-14)
    assert q.variance == pytest.approx(frozen.BETA_L4_VARIANCE, rel=1e-14)
    assert q.entropy == pytest.approx(frozen.BETA_L4_ENTROPY, rel=1e-12)


def test_symmetric_beta_is_even():
    q = O.beta_equilibrium(0.3, 0.0)
    w = np.linspace(0, 1, 17)
    assert np.allclose(q.density(w), q.density(-w), rtol=1e-15)


@pytest.mark.parametrize("lam,ratio", [(math.inf, 0.0), (0.0, 0.0), (-1.0, 0.0), (0.25, 1.0)])
def test_beta_rejects_degenerate(lam, ratio):
    with pytest.raises(DomainError):
        O.beta_equilibrium(lam, ratio)


def test_quasi_equilibrium_rejects_nonintegrable():
    with pytest.raises(DomainError):
        O.QuasiEquilibrium.from_exponents(-1.0, 0.5)


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("ratio", RATIOS)
def test_beta_mass_mean_and_cdf(lam, ratio):
    q = O.beta_equilibrium(lam, ratio)
    assert abs(q.mass() - 1.0) < 1e-10
    assert abs(q.moment_quad(1) - ratio) < 1e-8
    assert q.mean == pytest.approx(ratio, abs=1e-14)
    for w in (-0.9, -0.2, 0.4, 0.95):
        assert q.cdf(w) == pytest.approx(q.cdf_quad(w), abs=1e-9)
    assert q.cdf(-1.0) == 0.0 and q.cdf(1.0) == 1.0


def test_singular_exponents_quadrature():
    q = O.QuasiEquilibrium.from_exponents(-0.6, -0.3)
    assert abs(q.mass() - 1.0) < 1e-9
    assert q.cdf(0.5) == pytest.approx(q.cdf_quad(0.5), abs=1e-8)
    assert q.variance == pytest.approx(q.moment_quad(2) - q.moment_quad(1) ** 2, abs=1e-8)


def test_ppf_inverts_cdf():
    q = O.beta_equilibrium(0.5, 0.2)
    qs = np.linspace(0.01, 0.99, 21)
    assert np.allclose(q.cdf(q.ppf(qs)), qs, atol=1e-12)


def test_controlled_exponents_examples():
    grid = label_grid()
    st0 = WeightedStats(grid, np.ones(grid.size), np.zeros(grid.size), 0.0)
    a = O.controlled_exponents(0.4, 1.0, st0, 0.0, 0.1, 1.0, 0.25, 4 / 27)
    assert a == pytest.approx((0.0, 0.0), abs=1e-14)
    # vanishing control fraction recovers the Beta exponents
    stm = WeightedStats(grid, np.full(grid.size, 1.3), np.full(grid.size, 0.2), 0.0)
    am, ap = O.controlled_exponents(0.4, 1.3, stm, 0.0, 0.0, 1.0, 0.25, 1.0)
    q = O.beta_equilibrium(0.25, 0.2)
    assert (am, ap) == pytest.approx((q.alpha_minus, q.alpha_plus), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0), st.floats(1e-3, 0.99), st.floats(0.05, 2.0), st.floats(0.05, 0.95))
def test_calibration_identity(rho, d, theta, gamma, frac):
    s2 = gamma * frac
    k = gamma * gamma * theta * d / (rho * (1 - theta) * (gamma - s2))
    am, ap = O.quasi_equilibrium_exponents(rho, 0.0, d, 0.0, theta, gamma, s2, k)
    assert abs(am) < 1e-12 and abs(ap) < 1e-12


def test_exponent_guards():
    with pytest.raises(DomainError):
        O.quasi_equilibrium_exponents(0.0, 0.0, 1.0, 0.0, 0.1, 1.0, 0.25, 1.0)
    with pytest.raises(DomainError):
        O.quasi_equilibrium_exponents(1.0, 0.0, 1.0, 0.0, 0.1, 1.0, 0.25, 0.0)


def test_uniform_target():
    u = O.uniform_target()
    assert u.variance == pytest.approx(1 / 3)
    assert u.entropy_w == pytest.approx(0.693147, abs=1e-6)
    assert u.density * 2.0 == 1.0
    assert u.cdf(-1.0) == 0.0 and u.cdf(0.0) == 0.5 and u.cdf(1.0) == 1.0


def test_variance_decay_bound_examples():
    r = O.ConsensusRate(0.25)
    assert O.variance_decay_bound(0.0, 0.1, 0.0, r) == 0.1
    assert O.variance_decay_bound(1.0, 0.1, 0.0, r) == pytest.approx(frozen.DECAY_EXAMPLE, rel=1e-14)
    assert O.variance_decay_bound(1e4, 0.1, 0.2, r) == pytest.approx(0.04)
    c = O.DeclusterRate(0.1, 0.25)
    assert O.variance_decay_bound(50.0, 0.1, 0.0, c) == pytest.approx(1 / 3, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(-0.5, 0.5), st.floats(0.01, 0.5), st.floats(0, 5), st.floats(0, 5))
def test_decay_bound_monotone_toward_limit(e0, m, gamma, t1, t2):
    e0 = max(e0, m * m)
    r = O.ConsensusRate(gamma)
    lo, hi = sorted((t1, t2))
    assert O.variance_decay_bound(hi, e0, m, r) <= O.variance_decay_bound(lo, e0, m, r) + 1e-15
    assert O.variance_decay_bound(hi, e0, m, r) >= m * m - 1e-15


def test_spatial_profile_normalised():
    from scipy import integrate

    g = PowerLawGraphon()
    mass = integrate.quad(lambda x: O.spatial_profile(g, x), 0, 1)[0]
    assert mass == pytest.approx(1.0, rel=1e-8)
    # power law: B1/d is constant in x
    assert O.spatial_profile(g, 0.2) == pytest.approx(O.spatial_profile(g, 0.9))
    with pytest.raises(DomainError):
        O.spatial_profile(truncate(g, 2.0), 0.5)
