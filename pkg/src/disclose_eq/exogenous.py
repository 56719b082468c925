"""Equilibrium for a fixed (exogenous) reservation value.

The pinning condition is the scaled gap between the affine stretch of the
multiplier and F**(n-1), evaluated at the lower disclosure threshold
itself (z_function).  It is strictly increasing in v_L and strictly
decreasing in r, which gives a unique threshold r_lower_bar below which
the equilibrium conceals everything under r, and a unique interior
threshold v_L above it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .candidate import Candidate, build_candidate, build_g, solve_beta
from .errors import (
    DomainError,
    InfeasibleCandidateError,
    UnsupportedBoundaryError,
    ValidationFailureError,
)
from .posterior import PosteriorDistribution, full_disclosure_distribution
from .priors import Prior
from .rootfind import bisect_root

_EDGE = 1e-10

REGIME_NO_BOTTOM = "NoDisclosureAtBottom"
REGIME_BOTTOM = "DisclosureAtBottom"
REGIME_FULL = "FullDisclosure"  # alpha = 0 boundary only


@dataclass(frozen=True)
class ExogEquilibrium:
    prior: Prior
    n: int
    alpha: float
    r: float
    v_l_eq: float
    candidate: Candidate | None  # None only on the alpha = 0 boundary
    g: PosteriorDistribution
    eta: float
    alpha_tilde: float
    regime: str


def visit_probability(prior: Prior, n: int, v_l: float) -> float:
    """Chance a firm is visited by a costly searcher when G(r) = F(v_L)."""
    fl = prior.cdf(v_l)
    if fl >= 1.0:
        return 1.0
    return (1.0 - fl**n) / (n * (1.0 - fl))


def posterior_share(alpha: float, eta: float) -> float:
    """Bayes posterior that a visitor is a costly searcher."""
    return alpha * eta / (alpha * eta + 1.0 - alpha)


def z_function(prior: Prior, n: int, alpha: float, v_l: float, r: float) -> float:
    """Multiplier continuity gap at v_L; > 0 iff v_L is above the fixed point."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("z_function needs alpha in (0, 1)")
    beta, _, _, _ = solve_beta(prior, n, v_l, r)
    fl = prior.cdf(v_l)
    eta = visit_probability(prior, n, v_l)
    return alpha * (eta - fl ** (n - 1)) - (1.0 - alpha) * beta * (r - v_l)


@lru_cache(maxsize=4096)
def r_lower_bar(prior: Prior, n: int, alpha: float) -> float:
    """Reservation value below which nothing under r is disclosed."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("r_lower_bar needs alpha in (0, 1)")
    if n < 2:
        raise DomainError("need n >= 2")
    mu = prior.mean()
    lo, hi = _EDGE, mu - _EDGE
    return bisect_root(
        lambda r: z_function(prior, n, alpha, 0.0, r), lo, hi, xtol=1e-12
    )


def _v_l_lower_limit(prior: Prior, r: float) -> float:
    """Smallest v_L with a feasible candidate (0 when r < mean)."""
    if r < prior.mean():
        return 0.0
    return bisect_root(
        lambda x: prior.conditional_mean_above(x) - r, 0.0, 1.0 - _EDGE, xtol=1e-13
    )


def solve_v_l_eq(
    prior: Prior,
    n: int,
    alpha: float,
    r: float,
    rbar: float | None = None,
    check_monotone: bool = True,
) -> float:
    """The unique lower disclosure threshold for an exogenous r."""
    if not 0.0 < r < 1.0:
        raise DomainError("reservation value must lie in (0, 1)")
    if rbar is None:
        rbar = r_lower_bar(prior, n, alpha)
    if r <= rbar:
        return 0.0

    def z(v_l: float) -> float:
        try:
            return z_function(prior, n, alpha, v_l, r)
        except InfeasibleCandidateError:
            return -float("inf")  # below the feasibility frontier

    lo = max(_v_l_lower_limit(prior, r), 0.0) + _EDGE
    hi = r - _EDGE
    z_lo, z_hi = z(lo), z(hi)
    if z_lo >= 0.0 and lo <= 2.0 * _EDGE:
        # r sits within bisection tolerance of the concealment threshold:
        # the root lies below the bracket edge, i.e. at zero
        return 0.0
    if not (z_lo < 0.0 < z_hi):
        raise ValidationFailureError(
            "z-bracket", f"Z({lo})={z_lo}, Z({hi})={z_hi} at r={r}"
        )
    if check_monotone:
        # Uniqueness rests on the continuity gap crossing zero exactly once
        # (it increases at any crossing, by the convexity condition); sample
        # the sign pattern so a prior breaking the assumption fails loudly.
        # Note the gap need not be globally monotone above the root.
        samples = [z(lo + (hi - lo) * k / 17.0) for k in range(1, 17)]
        seen_positive = False
        for val in samples:
            if val > 1e-7:
                seen_positive = True
            elif seen_positive and val < -1e-7:
                raise ValidationFailureError(
                    "z-single-crossing", f"sign pattern +/- at r={r}"
                )
    return bisect_root(z, lo, hi, xtol=1e-12, f_lo=z_lo, f_hi=z_hi)


def solve_exog(prior: Prior, n: int, alpha: float, r: float) -> ExogEquilibrium:
    """Solve the fixed-reservation-value equilibrium."""
    if n < 2:
        raise DomainError("need n >= 2")
    if not 0.0 < r < 1.0:
        raise DomainError("reservation value must lie in (0, 1)")
    if alpha == 1.0:
        raise UnsupportedBoundaryError(
            "alpha = 1 admits a continuum of pooling equilibria; not representable"
        )
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    if not prior.check_convexity(n):
        raise DomainError("prior fails the convexity requirement on F**(n-1)")
    if alpha == 0.0:
        g = full_disclosure_distribution(prior)
        eta = visit_probability(prior, n, r)  # G(r) = F(r) under full disclosure
        return ExogEquilibrium(
            prior=prior,
            n=n,
            alpha=alpha,
            r=r,
            v_l_eq=r,
            candidate=None,
            g=g,
            eta=eta,
            alpha_tilde=0.0,
            regime=REGIME_FULL,
        )

    rbar = r_lower_bar(prior, n, alpha)
    v_l = solve_v_l_eq(prior, n, alpha, r, rbar=rbar)
    cand = build_candidate(prior, n, v_l, r)
    cand.validate()
    eta = visit_probability(prior, n, v_l)
    regime = REGIME_NO_BOTTOM if v_l == 0.0 else REGIME_BOTTOM

    if v_l > 0.0:
        # affine F**(n-1) sits exactly at equality here, so allow a small
        # relative slack for the ill-conditioned r -> 1 corner
        slope_f = prior.pow_cdf_deriv(v_l, n)
        if (1.0 - alpha) * cand.beta < slope_f * (1.0 - 1e-7) - 1e-9:
            raise ValidationFailureError(
                "multiplier-convexity-at-v_L",
                f"(1-a)*beta={(1.0 - alpha) * cand.beta} < dF^(n-1)={slope_f}",
            )
    else:
        z0 = z_function(prior, n, alpha, 0.0, r)
        if z0 < -1e-9:
            raise ValidationFailureError("multiplier-at-zero", f"Z(0,0,r)={z0}")

    return ExogEquilibrium(
        prior=prior,
        n=n,
        alpha=alpha,
        r=r,
        v_l_eq=v_l,
        candidate=cand,
        g=build_g(cand),
        eta=eta,
        alpha_tilde=posterior_share(alpha, eta),
        regime=regime,
    )
