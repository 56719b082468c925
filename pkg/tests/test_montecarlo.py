import json

import numpy as np
import pytest

from disclose_eq import full_disclosure_distribution
from disclose_eq.endogenous import solve_endog
from disclose_eq.errors import DomainError, ValidationFailureError
from disclose_eq.montecarlo import (
    HeterogeneousCosts,
    SimConfig,
    SingleCost,
    reservation_for_cost,
    sample_posterior,
    simulate_deviation,
    simulate_market,
)
from disclose_eq.verify import DiscreteCosts, payoff_u
from disclose_eq.welfare import cs_inexperienced, cs_savvy


def _z(x, mu, se):
    return abs(x - mu) / se


def test_sample_posterior_inverse(eq_uniform_small):
    eq = eq_uniform_small
    g = eq.g
    # the pooled branch inverts in closed form (flat prior, two firms)
    q = 0.5
    v = sample_posterior(g, q)
    expected = eq.r_star + (q - eq.v_l_star) / eq.beta_star
    assert v == pytest.approx(expected, abs=1e-12)
    # low quantiles come from the disclosed stretch
    v = sample_posterior(g, 0.1)
    assert v == pytest.approx(0.1, abs=1e-12)


def test_sample_posterior_kolmogorov(eq_uniform_small):
    g = eq_uniform_small.g
    rng = np.random.Generator(np.random.Philox(key=np.array([7, 0], dtype=np.uint64)))
    u = rng.random(200_000)
    draws = np.sort(np.asarray(sample_posterior(g, u)))
    emp = np.arange(1, len(draws) + 1) / len(draws)
    dist = np.max(np.abs(emp - np.asarray(g.cdf(draws))))
    # Dvoretzky-Kiefer-Wolfowitz at well beyond the 99% level for this n
    assert dist < 0.0045


def test_reservation_for_cost(eq_uniform_small):
    eq = eq_uniform_small
    assert reservation_for_cost(eq.g, eq.s) == pytest.approx(eq.r_star, abs=1e-9)
    # support entirely above the reserve: the whole mean is available
    large = solve_endog(eq.prior, 19, 0.5, 0.1)
    for s2 in (0.15, 0.3):
        assert reservation_for_cost(large.g, s2) == pytest.approx(0.5 - s2, abs=1e-9)
    # s -> 0 pushes the reserve to the top of the support
    assert reservation_for_cost(eq.g, 1e-8) == pytest.approx(eq.v_t_star, abs=1e-3)
    with pytest.raises(DomainError):
        reservation_for_cost(eq.g, 0.7)


def test_simulate_market_moments(eq_uniform_small):
    eq = eq_uniform_small
    cfg = SimConfig(consumers=300_000, seed=2024, cost_model=SingleCost(0.1), bins=40)
    rep = simulate_market(eq, cfg)
    assert _z(rep.eta_hat, eq.eta, rep.eta_se) < 3.0
    assert _z(rep.cs_savvy_hat, cs_savvy(eq.g, eq.n), rep.cs_savvy_se) < 3.0
    assert _z(rep.cs_inexperienced_hat, cs_inexperienced(eq), rep.cs_inexperienced_se) < 3.0
    assert sum(rep.firm_sale_shares) == pytest.approx(1.0, abs=1e-12)
    share_se = np.sqrt(0.5 * 0.5 / cfg.consumers)
    for share in rep.firm_sale_shares:
        assert _z(share, 0.5, share_se) < 3.0
    assert rep.multi_search_freq == pytest.approx(eq.v_l_star, abs=0.005)


def test_simulate_market_curve(eq_uniform_small):
    eq = eq_uniform_small
    cfg = SimConfig(consumers=300_000, seed=99, cost_model=SingleCost(0.1), bins=30)
    rep = simulate_market(eq, cfg)
    checked = 0
    for b in rep.curve:
        if b.visits >= 500 and b.se > 0:
            assert _z(b.u_hat, float(payoff_u(eq, b.v_mid)), b.se) < 4.0
            checked += 1
    assert checked >= 10
    # the reservation value is one of the bin edges
    edges = {b.bin_left for b in rep.curve} | {b.bin_right for b in rep.curve}
    assert any(abs(e - eq.r_star) < 1e-12 for e in edges)


def test_large_market_never_multi_searches(eq_uniform_large):
    cfg = SimConfig(consumers=100_000, seed=5, cost_model=SingleCost(0.1), bins=20)
    rep = simulate_market(eq_uniform_large, cfg)
    assert rep.multi_search_freq == 0.0  # exact: no mass below the reserve
    assert rep.visit_histogram[1] == rep.n_inexperienced
    assert rep.cs_inexperienced_hat == pytest.approx(0.4, abs=3 * rep.cs_inexperienced_se)


def test_reproducibility_and_parallel(eq_uniform_small):
    eq = eq_uniform_small
    base = dict(consumers=150_000, seed=77, cost_model=SingleCost(0.1), bins=25)
    a = simulate_market(eq, SimConfig(**base))
    b = simulate_market(eq, SimConfig(**base))
    assert json.dumps(a.to_json_dict(), sort_keys=True) == json.dumps(
        b.to_json_dict(), sort_keys=True
    )
    c = simulate_market(eq, SimConfig(**base, workers=4))
    assert json.dumps(a.to_json_dict(), sort_keys=True) == json.dumps(
        c.to_json_dict(), sort_keys=True
    )
    d = simulate_market(eq, SimConfig(**{**base, "seed": 78}))
    assert json.dumps(a.to_json_dict(), sort_keys=True) != json.dumps(
        d.to_json_dict(), sort_keys=True
    )


def test_heterogeneous_costs_stop_first(eq_uniform_large):
    # under the concealment equilibrium at the lowest cost, every cost type
    # stops at the first visited firm
    costs = DiscreteCosts(points=((0.1, 0.5), (0.2, 0.5)))
    cfg = SimConfig(
        consumers=60_000, seed=11, cost_model=HeterogeneousCosts(costs), bins=20
    )
    rep = simulate_market(eq_uniform_large, cfg)
    assert rep.multi_search_freq == 0.0
    # surplus: one draw at mu - E[s] on average
    expected = 0.5 - 0.15
    assert rep.cs_inexperienced_hat == pytest.approx(
        expected, abs=4 * rep.cs_inexperienced_se
    )


def test_simulate_deviation(eq_uniform_small):
    eq = eq_uniform_small
    cfg = SimConfig(consumers=150_000, seed=31, cost_model=SingleCost(0.1), bins=20)
    share, se = simulate_deviation(eq, 0, eq.g, cfg)
    assert _z(share, 0.5, se) < 3.0
    share_f, se_f = simulate_deviation(eq, 0, full_disclosure_distribution(eq.prior), cfg)
    assert share_f <= 0.5 + 3.0 * se_f  # equilibrium optimality
    from disclose_eq import point_mass

    with pytest.raises(ValidationFailureError):
        simulate_deviation(eq, 0, point_mass(eq.prior, 0.9), cfg)


def test_thread_env_var_leaves_totals_unchanged(eq_uniform_small, monkeypatch):
    eq = eq_uniform_small
    base = dict(consumers=150_000, seed=77, cost_model=SingleCost(0.1), bins=25)
    serial = simulate_market(eq, SimConfig(**base))
    monkeypatch.setenv("DISCLOSE_EQ_THREADS", "3")
    threaded = simulate_market(eq, SimConfig(**base))
    assert json.dumps(serial.to_json_dict(), sort_keys=True) == json.dumps(
        threaded.to_json_dict(), sort_keys=True
    )


def test_point_mass_deviation_matches_analytic_gain(uniform):
    # two-firm counterfactual where everyone else discloses fully and one
    # firm deviates to the no-information signal: the simulated sale share
    # must line up with the analytic payoff route
    from disclose_eq import point_mass
    from disclose_eq.endogenous import Equilibrium, r_full_info
    from disclose_eq.exogenous import posterior_share, visit_probability
    from disclose_eq.verify import expected_payoff_under

    alpha, s = 0.65, 0.2
    r = r_full_info(uniform, s)
    assert r < 0.5  # the pooled mean now stops the costly searcher
    eta = visit_probability(uniform, 2, r)
    market = Equilibrium(
        prior=uniform,
        n=2,
        alpha=alpha,
        s=s,
        r_star=r,
        v_l_star=r,
        v_h_star=r,
        v_t_star=1.0,
        beta_star=None,
        eta=eta,
        alpha_tilde=posterior_share(alpha, eta),
        g=full_disclosure_distribution(uniform),
        bottom_disclosure=True,
        top_disclosure=False,
    )
    g_dev = point_mass(uniform, 0.5)
    gain = expected_payoff_under(market, g_dev) - expected_payoff_under(market, market.g)
    assert gain > 1e-3  # deviating is strictly profitable here
    cfg = SimConfig(consumers=200_000, seed=271828, cost_model=SingleCost(s), bins=20)
    share, se = simulate_deviation(market, 0, g_dev, cfg)
    visit_prob = alpha * eta + (1.0 - alpha)
    expected_share = visit_prob * expected_payoff_under(market, g_dev)
    assert abs(share - expected_share) < 4.0 * se
    assert share > 0.5 + 3.0 * se  # the sign shows up in the sample


def test_config_validation(eq_uniform_small):
    with pytest.raises(DomainError):
        SimConfig(consumers=0, seed=1, cost_model=SingleCost(0.1))
    with pytest.raises(DomainError):
        SimConfig(consumers=10, seed=1, cost_model=SingleCost(0.1), bins=5)
    cfg = SimConfig(consumers=10, seed=1, cost_model=SingleCost(0.1), n=3)
    with pytest.raises(DomainError):
        simulate_market(eq_uniform_small, cfg)  # n mismatch
