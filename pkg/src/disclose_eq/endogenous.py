"""The full model: reservation value and disclosure solved jointly.

The fixed point couples the exogenous-reserve map r -> v_L(r) with the
search indifference condition, which in equilibrium collapses to an
integral against the *prior* above v_L.  The outer bisection runs in r
because v_L(r) is single-valued while its inverse is a correspondence at
v_L = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .candidate import Candidate, build_candidate, build_g
from .errors import (
    DomainError,
    IterationCapError,
    NoInteriorRootError,
    UnsupportedBoundaryError,
    ValidationFailureError,
)
from .exogenous import (
    REGIME_FULL,
    posterior_share,
    r_lower_bar,
    solve_v_l_eq,
    visit_probability,
)
from .posterior import (
    Flat,
    FullDisclosure,
    PosteriorDistribution,
    full_disclosure_distribution,
)
from .priors import Prior
from .rootfind import bisect_root

_EDGE = 1e-12
_N_CAP = 1 << 20


@dataclass(frozen=True)
class Equilibrium:
    """A solved market: primitives, thresholds, beliefs, and the posterior cdf."""

    prior: Prior
    n: int
    alpha: float
    s: float
    r_star: float
    v_l_star: float
    v_h_star: float
    v_t_star: float
    beta_star: float | None  # None only on the alpha = 0 boundary
    eta: float
    alpha_tilde: float
    g: PosteriorDistribution
    bottom_disclosure: bool
    top_disclosure: bool
    candidate: Candidate | None = None
    note: str = ""

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "prior": self.prior.to_json_dict(),
            "n": self.n,
            "alpha": self.alpha,
            "s": self.s,
            "r_star": self.r_star,
            "v_L_star": self.v_l_star,
            "v_H_star": self.v_h_star,
            "v_T_star": self.v_t_star,
            "beta_star": self.beta_star,
            "eta": self.eta,
            "alpha_tilde": self.alpha_tilde,
            "bottom_disclosure": self.bottom_disclosure,
            "top_disclosure": self.top_disclosure,
            "G": self.g.to_json_dict(),
            "note": self.note,
        }


@dataclass(frozen=True)
class LimitEquilibrium:
    """Infinite-market limit: censoring below v_h_inf onto a single atom."""

    v_h_inf: float
    atom_mass: float
    g_inf: PosteriorDistribution


def search_residual_prior(prior: Prior, v_l: float, r: float, s: float) -> float:
    """Equilibrium form of the search equation: int_{v_L}^1 (v - r) dF - s."""
    return prior.partial_vf(v_l, 1.0) - r * (1.0 - prior.cdf(v_l)) - s


def search_residual_posterior(g: PosteriorDistribution, r: float, s: float) -> float:
    """Raw search equation: int_r^1 (v - r) dG - s."""
    return float(g.excess_above(r)) - s


def r_full_info(prior: Prior, s: float) -> float:
    """Reservation value when every value is disclosed."""
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise DomainError(f"search cost must lie in (0, {mu}), got {s}")
    return bisect_root(
        lambda r: search_residual_prior(prior, r, r, s), 0.0, 1.0, xtol=1e-13
    )


def r_search(prior: Prior, v_l: float, s: float) -> float:
    """Reservation value implied by the search equation at threshold v_L."""
    if not 0.0 <= v_l < 1.0:
        raise DomainError("v_L must lie in [0, 1)")
    mass = 1.0 - prior.cdf(v_l)
    return (prior.partial_vf(v_l, 1.0) - s) / mass


def assemble_market(
    prior: Prior, n: int, alpha: float, v_l: float, r: float, s: float
) -> Equilibrium:
    """Build the market objects for given thresholds without asserting
    that they solve the fixed point (used for perturbation tests)."""
    cand = build_candidate(prior, n, v_l, r)
    eta = visit_probability(prior, n, v_l)
    return Equilibrium(
        prior=prior,
        n=n,
        alpha=alpha,
        s=s,
        r_star=r,
        v_l_star=v_l,
        v_h_star=cand.v_h,
        v_t_star=cand.v_t,
        beta_star=cand.beta,
        eta=eta,
        alpha_tilde=posterior_share(alpha, eta),
        g=build_g(cand),
        bottom_disclosure=v_l > 0.0,
        top_disclosure=cand.v_h < 1.0,
        candidate=cand,
    )


def validate_equilibrium(eq: Equilibrium) -> None:
    """Post-solve invariant suite; raises ValidationFailureError."""
    res_prior = search_residual_prior(eq.prior, eq.v_l_star, eq.r_star, eq.s)
    if abs(res_prior) > 1e-9:
        raise ValidationFailureError("search-equation-prior-form", f"residual {res_prior}")
    res_post = search_residual_posterior(eq.g, eq.r_star, eq.s)
    if abs(res_post) > 1e-8:
        raise ValidationFailureError("search-equation", f"residual {res_post}")
    rfi = r_full_info(eq.prior, eq.s)
    if not eq.r_star < rfi + 1e-12:
        raise ValidationFailureError("below-full-info", f"{eq.r_star} >= {rfi}")
    if eq.candidate is not None:
        eq.candidate.validate()
    rbar = r_lower_bar(eq.prior, eq.n, eq.alpha)
    mu = eq.prior.mean()
    if (not eq.bottom_disclosure) != (rbar >= mu - eq.s - 1e-10):
        raise ValidationFailureError(
            "regime", f"bottom_disclosure={eq.bottom_disclosure} but rbar={rbar}"
        )
    if not eq.bottom_disclosure and abs(eq.r_star - (mu - eq.s)) > 1e-12:
        raise ValidationFailureError("regime-reserve", f"r* != mu - s: {eq.r_star}")
    # fixed-point self-consistency: re-solving the disclosure threshold at
    # r* must return v_L*
    v_l_back = solve_v_l_eq(eq.prior, eq.n, eq.alpha, eq.r_star, check_monotone=False)
    if abs(v_l_back - eq.v_l_star) > 1e-9:
        raise ValidationFailureError(
            "fixed-point", f"v_L rewind {v_l_back} vs {eq.v_l_star}"
        )


def solve_endog(prior: Prior, n: int, alpha: float, s: float) -> Equilibrium:
    """Solve the full model for (prior, n, alpha, s)."""
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise DomainError(f"search cost must lie in (0, {mu}), got {s}")
    if n < 2:
        raise DomainError("need n >= 2")
    if alpha == 1.0:
        raise UnsupportedBoundaryError(
            "alpha = 1 admits a continuum of pooling equilibria; not representable"
        )
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    if not prior.check_convexity(n):
        raise DomainError("prior fails the convexity requirement on F**(n-1)")

    if alpha == 0.0:
        r = r_full_info(prior, s)
        return Equilibrium(
            prior=prior,
            n=n,
            alpha=0.0,
            s=s,
            r_star=r,
            v_l_star=r,
            v_h_star=r,
            v_t_star=1.0,
            beta_star=None,
            eta=visit_probability(prior, n, r),
            alpha_tilde=0.0,
            g=full_disclosure_distribution(prior),
            bottom_disclosure=True,
            top_disclosure=False,
            candidate=None,
            note=REGIME_FULL,
        )

    rbar = r_lower_bar(prior, n, alpha)
    if rbar >= mu - s:
        r_star, v_l_star = mu - s, 0.0
    else:
        rfi = r_full_info(prior, s)

        def gap(r: float) -> float:
            v_l = solve_v_l_eq(prior, n, alpha, r, rbar=rbar, check_monotone=False)
            return r_search(prior, v_l, s) - r

        lo, hi = mu - s + _EDGE, rfi - _EDGE
        g_lo = gap(lo)
        if g_lo <= 0.0:
            # the regime boundary itself (rbar numerically equal to mu - s)
            r_star, v_l_star = mu - s, 0.0
        else:
            r_star = bisect_root(gap, lo, hi, xtol=1e-12, f_lo=g_lo)
            v_l_star = solve_v_l_eq(prior, n, alpha, r_star, rbar=rbar)

    eq = assemble_market(prior, n, alpha, v_l_star, r_star, s)
    validate_equilibrium(eq)
    return eq


def n_lower_bar(prior: Prior, alpha: float, s: float) -> int:
    """Smallest market size at which nothing below the reserve is disclosed."""
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise DomainError(f"search cost must lie in (0, {mu}), got {s}")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")

    def large_enough(n: int) -> bool:
        return r_lower_bar(prior, n, alpha) >= mu - s

    if large_enough(2):
        return 2
    hi = 4
    while not large_enough(hi):
        hi *= 2
        if hi > _N_CAP:
            raise IterationCapError(f"no concealment threshold below n = {_N_CAP}")
    lo = hi // 2  # largest known-false
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if large_enough(mid):
            hi = mid
        else:
            lo = mid
    return hi


def v_h_large_n(prior: Prior, n: int, s: float) -> float:
    """Upper disclosure threshold in a large market with r* = mu - s.

    Solves int_0^v F du = (n-1)/n * F(v) * (v - r); the unique interior
    root exists only when the pooled branch stops short of 1.
    """
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise DomainError(f"search cost must lie in (0, {mu}), got {s}")
    r = mu - s

    def contact(v: float) -> float:
        return float(prior.cum_cdf(v)) - (n - 1) / n * prior.cdf(v) * (v - r)

    if contact(1.0) >= 0.0:
        raise NoInteriorRootError(f"no disclosure at the top at n = {n}")
    return bisect_root(contact, r, 1.0, xtol=1e-13)


def limit_equilibrium(prior: Prior, alpha: float, s: float) -> LimitEquilibrium:
    """Infinite-market limit: atom at mu - s, censoring below v_h_inf."""
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise DomainError(f"search cost must lie in (0, {mu}), got {s}")
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    r = mu - s
    v_h_inf = bisect_root(
        lambda w: prior.partial_vf(0.0, w) - r * prior.cdf(w), 1e-12, 1.0, xtol=1e-13
    )
    mass = float(prior.cdf(v_h_inf))
    g_inf = PosteriorDistribution(
        prior=prior,
        segments=(
            Flat(0.0, r, 0.0),
            Flat(r, v_h_inf, mass),
            FullDisclosure(v_h_inf, 1.0),
        ),
        atom=(r, mass),
    )
    return LimitEquilibrium(v_h_inf=v_h_inf, atom_mass=mass, g_inf=g_inf)
