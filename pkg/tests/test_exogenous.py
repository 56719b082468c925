import numpy as np
import pytest

from disclose_eq import PowerPrior
from disclose_eq.errors import DomainError, UnsupportedBoundaryError
from disclose_eq.exogenous import (
    REGIME_BOTTOM,
    REGIME_FULL,
    REGIME_NO_BOTTOM,
    r_lower_bar,
    solve_exog,
    visit_probability,
    z_function,
)


def uniform_v_l_eq(alpha: float, r: float) -> float:
    return max((2.0 * r - alpha) / (2.0 - alpha), 0.0)


def test_z_examples(uniform):
    # at the collapse point the candidate term dominates: strictly positive
    r = 0.4
    z = z_function(uniform, 2, 0.5, r - 1e-9, r)
    eta_r = visit_probability(uniform, 2, r)
    assert z == pytest.approx(0.5 * (eta_r - r), abs=1e-6)
    assert z > 0.0
    # the closed case: alpha = 0.5, r = alpha/2 makes the gap vanish at zero
    assert z_function(uniform, 2, 0.5, 0.0, 0.25) == pytest.approx(0.0, abs=1e-12)
    # as alpha vanishes the slope term takes over, so the gap is negative
    assert z_function(uniform, 2, 1e-9, 0.2, 0.4) < 0.0


def test_r_lower_bar_uniform(uniform):
    for alpha in (0.1, 0.3, 0.5, 0.65, 0.9):
        assert r_lower_bar(uniform, 2, alpha) == pytest.approx(alpha / 2, abs=1e-10)
    assert r_lower_bar(uniform, 2, 0.65) == pytest.approx(0.325, abs=1e-10)


def test_r_lower_bar_monotone_in_n(uniform, power2):
    for prior in (uniform, power2):
        mu = prior.mean()
        vals = [r_lower_bar(prior, n, 0.5) for n in (2, 3, 4, 8, 16, 64, 256, 1024)]
        assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))
        assert all(v < mu for v in vals)
        # approaches the mean from below
        assert mu - vals[-1] < mu - vals[0]
        assert vals[-1] > 0.9 * mu


def test_solve_exog_uniform_closed_form(uniform):
    for alpha in (0.2, 0.5, 0.8):
        for r in (0.05, 0.2, 0.4, 0.6, 0.8):
            eq = solve_exog(uniform, 2, alpha, r)
            assert eq.v_l_eq == pytest.approx(uniform_v_l_eq(alpha, r), abs=1e-8)
            beta_expected = min(1.0 / (1.0 - alpha), 1.0 / (1.0 - 2.0 * r)) if r < 0.5 else 1.0 / (1.0 - alpha)
            assert eq.candidate.beta == pytest.approx(beta_expected, rel=1e-8)


def test_solve_exog_example_values(uniform):
    eq = solve_exog(uniform, 2, 0.65, 0.49)
    assert eq.v_l_eq == pytest.approx((0.98 - 0.65) / 1.35, abs=1e-8)
    assert eq.regime == REGIME_BOTTOM
    eq = solve_exog(uniform, 2, 0.65, 0.3)
    assert eq.v_l_eq == 0.0
    assert eq.regime == REGIME_NO_BOTTOM


def test_v_l_eq_increasing_in_r(uniform, power2):
    for prior, n in [(uniform, 2), (power2, 3)]:
        rbar = r_lower_bar(prior, n, 0.5)
        rs = np.linspace(rbar + 0.02, 0.9, 12)
        vls = [solve_exog(prior, n, 0.5, float(r)).v_l_eq for r in rs]
        assert all(b > a for a, b in zip(vls, vls[1:]))


def test_regime_boundary_continuity(uniform):
    rbar = r_lower_bar(uniform, 2, 0.5)
    for eps in (1e-3, 1e-5, 1e-7):
        eq = solve_exog(uniform, 2, 0.5, rbar + eps)
        assert 0.0 < eq.v_l_eq < 2.0 * eps
    assert solve_exog(uniform, 2, 0.5, rbar).v_l_eq == 0.0  # ties break downward


def test_full_disclosure_limits(uniform, power2):
    # near both reserve boundaries the disclosure collapses onto the prior
    grid = np.linspace(0.0, 1.0, 1001)
    for prior, n in [(uniform, 2), (power2, 2)]:
        for r in (1e-4, 1.0 - 1e-4):
            eq = solve_exog(prior, n, 0.5, r)
            sup = np.max(np.abs(np.asarray(eq.g.cdf(grid)) - np.asarray(prior.cdf(grid))))
            assert sup < 1e-3


def test_alpha_scan_to_zero(uniform):
    r = 0.4
    gaps = []
    for alpha in (1e-2, 1e-4, 1e-6):
        eq = solve_exog(uniform, 2, alpha, r)
        gaps.append(r - eq.v_l_eq)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5


def test_boundaries(uniform):
    eq = solve_exog(uniform, 2, 0.0, 0.4)
    assert eq.regime == REGIME_FULL
    assert eq.candidate is None
    assert float(eq.g.cdf(0.37)) == pytest.approx(0.37)
    with pytest.raises(UnsupportedBoundaryError):
        solve_exog(uniform, 2, 1.0, 0.4)
    with pytest.raises(DomainError):
        solve_exog(uniform, 2, 0.5, 0.0)
    with pytest.raises(DomainError):
        solve_exog(uniform, 1, 0.5, 0.4)
    with pytest.raises(DomainError):
        solve_exog(PowerPrior(a=0.4), 2, 0.5, 0.4)  # F^(n-1) concave


def test_exog_belief_identities(uniform):
    eq = solve_exog(uniform, 2, 0.65, 0.49)
    fl = eq.v_l_eq
    assert eq.eta == pytest.approx((1.0 - fl**2) / (2.0 * (1.0 - fl)), abs=1e-10)
    assert eq.alpha_tilde == pytest.approx(
        0.65 * eq.eta / (0.65 * eq.eta + 0.35), abs=1e-12
    )
