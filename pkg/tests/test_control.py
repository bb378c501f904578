import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_opinion import control as C
from graphon_opinion.errors import DomainError
from graphon_opinion.graphon import ConstantGraphon, KNNGraphon, PowerLawGraphon, SmallWorldGraphon, truncate
from graphon_opinion.kinetic_mc import init_ensemble

import frozen


def test_constant_kernel_weights_collapse():
    rng = np.random.default_rng(3)
    x, w = rng.random(200), rng.uniform(-1, 1, 200)
    s = C.weighted_stats(x, w, ConstantGraphon(1.0))
    assert np.allclose(s.rho_P, 1.0)
    assert np.allclose(s.mu_P, w.mean())
    assert s.rho == pytest.approx(1.0) and s.mu == pytest.approx(w.mean())


def test_symmetric_opinions_have_zero_momentum():
    s = C.weighted_stats([0.3, 0.7], [0.4, -0.4], ConstantGraphon(1.0))
    assert np.allclose(s.mu_P, 0.0, atol=1e-15)


def test_single_agent_on_power_law():
    s = C.weighted_stats([1.0], [1.0], PowerLawGraphon())
    assert np.allclose(s.rho_P, 9 / 16 * s.x_grid ** -0.25, rtol=1e-14)
    assert np.allclose(s.mu_P, 1.0)


def test_undefined_momentum_is_flagged():
    # band kernel sees nobody far from the lone agent
    s = C.weighted_stats([0.5], [0.2], SmallWorldGraphon(0.05))
    assert s.undefined.any() and not s.undefined.all()
    assert np.all(np.isnan(s.mu_P[s.undefined]))


def test_unbounded_kernel_at_labels_rejected():
    with pytest.raises(DomainError):
        C.weighted_stats([0.0, 0.5], [0.1, 0.2], PowerLawGraphon())


def test_kappa_separable_examples():
    assert C.kappa_separable(0.1, 1.0, 0.25) == pytest.approx(frozen.KAPPA_BAR, rel=1e-15)
    assert C.kappa_separable(0.5, 1.0, 0.5) == pytest.approx(frozen.KAPPA_BAR_HALF)
    assert C.kappa_separable(1e-9, 1.0, 0.25) < 1e-8
    with pytest.raises(DomainError, match="diffusion too strong"):
        C.kappa_separable(0.1, 0.25, 0.25)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 0.99), st.floats(1e-3, 0.99), st.floats(0.01, 1.0), st.floats(0.05, 0.95))
def test_kappa_separable_increasing_in_theta(t1, t2, gamma, frac):
    s2 = gamma * frac
    lo, hi = sorted((t1, t2))
    assert 0 < C.kappa_separable(lo, gamma, s2) <= C.kappa_separable(hi, gamma, s2)


def _stats(rho, mu=0.0, m=0.0):
    grid = C.label_grid()
    return C.WeightedStats(grid, np.full(grid.size, rho), np.full(grid.size, mu), m)


def test_kappa_general_examples():
    pen = C.kappa_general(0.3, _stats(1.0), ConstantGraphon(1.0), 0.1, 1.0, 0.25)
    assert pen.kappa == pytest.approx(frozen.KAPPA_BAR)
    pen = C.kappa_general(0.3, _stats(1.0), None, 0.1, 1.0, 0.25, degree=2.0)
    assert pen.kappa == pytest.approx(frozen.KAPPA_D2_RHO1)
    assert pen.mean_ok and bool(pen.mu_ok)


def test_kappa_general_side_conditions():
    pen = C.kappa_general(0.3, _stats(1.0, mu=0.2, m=0.1), None, 0.1, 1.0, 0.25, degree=1.0)
    assert not pen.mean_ok and not bool(pen.mu_ok)


def test_kappa_general_rejects():
    with pytest.raises(DomainError):
        C.kappa_general(0.3, _stats(0.0), None, 0.1, 1.0, 0.25, degree=1.0)
    with pytest.raises(DomainError):
        C.kappa_general(0.3, _stats(1.0), None, 0.1, 0.2, 0.25, degree=1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(1e-3, 0.99), st.floats(0.05, 0.95))
def test_general_equals_separable_when_degree_is_mass(d, theta, frac):
    pen = C.kappa_general(0.5, _stats(d), None, theta, 1.0, frac, degree=d)
    assert pen.kappa == pytest.approx(C.kappa_separable(theta, 1.0, frac), rel=1e-14)


@pytest.mark.parametrize(
    "g", [truncate(PowerLawGraphon(), 4.0), SmallWorldGraphon(0.125), KNNGraphon(0.125, 0.75)],
    ids=lambda g: g.kind,
)
def test_uniform_ensemble_gives_near_bar_penalty(g):
    ens = init_ensemble(20_000, 5, {"kind": "uniform"})
    s = C.weighted_stats(ens.labels, ens.opinions, g)
    grid = s.x_grid
    pen = C.kappa_general(grid, s, g, 0.1, 1.0, 0.25)
    # rho_P estimates the in-degree, so the ratio is close to 1
    assert np.max(np.abs(pen.kappa / frozen.KAPPA_BAR - 1.0)) < 0.1


def test_separable_mass_and_momentum_are_conserved_in_uncontrolled_run():
    from graphon_opinion.config import preset
    from graphon_opinion.kinetic_mc import Engine, init_ensemble as init

    cfg = preset("uncontrolled-beta", n_agents=4000, t_final=2.0, snapshot_times=[0.0])
    from graphon_opinion.config import build_model

    model = build_model(cfg)
    ens = init(cfg.n_agents, 1)
    cache = C.LabelStatsCache(ens.labels, model.graphon)
    s0 = cache.stats(ens.opinions)
    eng = Engine(ens, model.graphon, model.scaled, model.P, model.noise, model.control)
    for _ in range(4000):
        eng.advance()
    s1 = cache.stats(ens.opinions)
    se = np.std(ens.opinions) / np.sqrt(ens.n)
    assert s1.rho == s0.rho
    assert abs(s1.mu - s0.mu) < 3 * se
