"""Structural pooling candidates for a fixed (v_L, r) pair.

A candidate is the unique distribution that discloses below v_L, pools
(v_L, r) into an interval above r on which cdf**(n-1) is affine with
slope beta, and re-contacts the prior at v_H.  Solving for beta is the
innermost loop of every equilibrium computation, so two routes are
implemented:

* solve_beta: the production path.  The defining system (contact at v_H
  plus the preserved conditional mean) reduces to one equation in the
  contact point alone, bisected once; when the pooled branch caps at 1
  before re-contact, beta has a closed form in truncated moments.
* solve_beta_via_h_star: the literal integrated-gap bisection in beta
  with the contact point recomputed inside each step.  Slower by two
  orders of magnitude; kept as an independent cross-check and exercised
  by the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BracketError,
    InfeasibleCandidateError,
    NoUpperRootError,
    ValidationFailureError,
)
from .posterior import AffinePower, Flat, FullDisclosure, PosteriorDistribution
from .priors import Prior
from .rootfind import bisect_root

FEAS_MARGIN = 1e-12  # strictness margin on E[v | v > v_L] > r
_XTOL = 1e-14


@dataclass(frozen=True)
class RootBundle:
    """Diagnostic roots of the contact gap D at the solved slope."""

    v_m: float  # maximizer of D on [r, 1]
    v_1d: float | None  # lower root, if D attains positive values
    v_2d: float | None  # upper root inside [r, 1], if any
    v_bar: float  # where the pooled branch reaches cdf 1


@dataclass(frozen=True)
class Candidate:
    prior: Prior
    n: int
    v_l: float
    r: float
    beta: float
    v_h: float
    v_t: float

    def posterior(self) -> PosteriorDistribution:
        return build_g(self)

    def validate(self, grid_size: int = 2001) -> None:
        validate_candidate(self, grid_size=grid_size)


def candidate_exists(prior: Prior, n: int, v_l: float, r: float) -> bool:
    """A candidate exists iff the mean above v_L strictly exceeds r."""
    if not 0.0 <= v_l < r < 1.0:
        return False
    return prior.conditional_mean_above(v_l) > r + FEAS_MARGIN


def d_function(prior: Prior, n: int, v_l: float, r: float, beta: float, v: float) -> float:
    """Gap between the pooled branch of cdf**(n-1) and F**(n-1) at v."""
    fl = prior.cdf(v_l)
    return fl ** (n - 1) + beta * (v - r) - prior.cdf(v) ** (n - 1)


def _contact_of_beta(prior: Prior, n: int, v_l: float, r: float, beta: float) -> tuple[float, float]:
    """(v_H, v_T) for a given slope; raises NoUpperRootError when the pooled
    branch neither re-contacts F**(n-1) nor reaches 1 on [r, 1]."""
    fl = prior.cdf(v_l)
    fln1 = fl ** (n - 1)
    if fln1 + beta * (1.0 - r) >= 1.0:
        # branch caps at 1 inside [r, 1]: contact happens at the top
        v_bar = r + (1.0 - fln1) / beta
        return 1.0, min(v_bar, 1.0)

    def d(v: float) -> float:
        return fln1 + beta * (v - r) - prior.cdf(v) ** (n - 1)

    def d_slope(v: float) -> float:
        return beta - prior.pow_cdf_deriv(v, n)

    # D is concave (F**(n-1) weakly convex); find its maximizer first.
    if d_slope(r) <= 0.0:
        raise NoUpperRootError("slope below the prior's growth at r")
    if d_slope(1.0) >= 0.0:
        # D increasing throughout and D(1) < 0 here
        raise NoUpperRootError("pooled branch never re-contacts the prior")
    v_m = bisect_root(d_slope, r, 1.0, xtol=_XTOL)
    if d(v_m) <= 0.0:
        raise NoUpperRootError("contact gap stays negative on [r, 1]")
    v_h = bisect_root(d, v_m, 1.0, xtol=_XTOL)
    return v_h, 1.0


def h_star(prior: Prior, n: int, v_l: float, r: float, beta: float) -> float:
    """Integrated cdf gap of the candidate at the contact point.

    Positive means the slope is too small, negative too large; the unique
    zero pins down the candidate (strictly decreasing in beta).
    """
    v_h, v_t = _contact_of_beta(prior, n, v_l, r, beta)
    fl = prior.cdf(v_l)
    fh = prior.cdf(v_h)
    pooled_area = (n - 1) / (n * beta) * (fh**n - fl**n) + (1.0 - v_t)
    return (
        float(prior.cum_cdf(v_h) - prior.cum_cdf(v_l))
        - fl * (r - v_l)
        - pooled_area
    )


def _mean_match_residual(prior: Prior, n: int, v_l: float, r: float, v: float) -> float:
    """Mass-scaled gap between the contact slope at v and the moment slope.

    Zero exactly at the contact point of the valid candidate; negative at
    r, positive at 1 whenever the contact is interior.
    """
    fl = prior.cdf(v_l)
    fln1 = fl ** (n - 1)
    fv = prior.cdf(v)
    mass = fv - fl
    vf = prior.partial_vf(v_l, v)
    eta_mass = (fv**n - fl**n) / n - fln1 * mass  # (eta_tilde - F(v_L)^(n-1)) * mass
    return (fv ** (n - 1) - fln1) * (vf - r * mass) - eta_mass * (v - r)


def solve_beta(
    prior: Prior, n: int, v_l: float, r: float
) -> tuple[float, float, float, RootBundle]:
    """Solve (beta, v_H, v_T) for the unique candidate at (v_L, r)."""
    if not 0.0 <= v_l < r < 1.0:
        raise InfeasibleCandidateError(f"need 0 <= v_L < r < 1, got ({v_l}, {r})")
    if not candidate_exists(prior, n, v_l, r):
        raise InfeasibleCandidateError(
            f"E[v | v > {v_l}] <= {r}: no mean-preserving candidate"
        )
    fl = prior.cdf(v_l)
    fln1 = fl ** (n - 1)
    if _mean_match_residual(prior, n, v_l, r, 1.0) > 0.0:
        # Interior contact: bisect the single mean-match equation in v_H.
        # The residual is strictly negative at r but can underflow to 0.0
        # at extreme parameters, so its sign is pinned analytically.
        v_h = bisect_root(
            lambda v: _mean_match_residual(prior, n, v_l, r, v),
            r,
            1.0,
            xtol=_XTOL,
            f_lo=-1.0,
        )
        if v_h - r > 1e-13:
            beta = (prior.cdf(v_h) ** (n - 1) - fln1) / (v_h - r)
        else:  # total collapse toward full disclosure (r at the support edge)
            beta = prior.pow_cdf_deriv(r, n)
        v_t = 1.0
    else:
        # the pooled branch caps at 1 before re-contact: moment closed form
        tm = prior.truncated_moments(v_l, 1.0, n)
        beta = (tm.eta_tilde - fln1) / (tm.mu_tilde - r)
        v_h = 1.0
        v_t = min(r + (1.0 - fln1) / beta, 1.0)
    return beta, v_h, v_t, _root_bundle(prior, n, v_l, r, beta)


def solve_beta_via_h_star(
    prior: Prior, n: int, v_l: float, r: float, *, rtol: float = 1e-12
) -> tuple[float, float, float, RootBundle]:
    """Reference implementation: bisect the integrated gap in beta directly."""
    if not candidate_exists(prior, n, v_l, r):
        raise InfeasibleCandidateError(
            f"E[v | v > {v_l}] <= {r}: no mean-preserving candidate"
        )

    def gap(beta: float) -> float:
        try:
            return h_star(prior, n, v_l, r, beta)
        except NoUpperRootError:
            return np.inf  # slope too small

    hi = 1.0
    for _ in range(200):
        if gap(hi) < 0.0:
            break
        hi *= 2.0
    else:  # pragma: no cover - finite by the infinite-slope sign argument
        raise BracketError("no finite upper bracket for the pooling slope")
    lo = np.finfo(float).eps
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * mid:
            break
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    v_h, v_t = _contact_of_beta(prior, n, v_l, r, beta)
    return beta, v_h, v_t, _root_bundle(prior, n, v_l, r, beta)


def _root_bundle(prior: Prior, n: int, v_l: float, r: float, beta: float) -> RootBundle:
    fl = prior.cdf(v_l)
    fln1 = fl ** (n - 1)
    # beta can underflow to 0.0 at bracket endpoints of the outer solvers
    v_bar = r + (1.0 - fln1) / beta if beta > 0.0 else float("inf")

    def d(v: float) -> float:
        return fln1 + beta * (v - r) - prior.cdf(v) ** (n - 1)

    def d_slope(v: float) -> float:
        return beta - prior.pow_cdf_deriv(v, n)

    if d_slope(r) <= 0.0:
        v_m = r
    elif d_slope(1.0) >= 0.0:
        v_m = 1.0
    else:
        v_m = bisect_root(d_slope, r, 1.0, xtol=_XTOL)
    v_1d = v_2d = None
    if d(v_m) > 0.0:
        if v_m > r and d(r) < 0.0:
            v_1d = bisect_root(d, r, v_m, xtol=_XTOL)
        if v_m < 1.0 and d(1.0) < 0.0:
            v_2d = bisect_root(d, v_m, 1.0, xtol=_XTOL)
    return RootBundle(v_m=v_m, v_1d=v_1d, v_2d=v_2d, v_bar=v_bar)


def build_candidate(prior: Prior, n: int, v_l: float, r: float) -> Candidate:
    beta, v_h, v_t, _ = solve_beta(prior, n, v_l, r)
    return Candidate(prior=prior, n=n, v_l=v_l, r=r, beta=beta, v_h=v_h, v_t=v_t)


def build_g(cand: Candidate) -> PosteriorDistribution:
    """Assemble the piecewise posterior cdf of a candidate."""
    prior, n = cand.prior, cand.n
    fl = float(prior.cdf(cand.v_l))
    segs: list = []
    if cand.v_l > 0.0:
        segs.append(FullDisclosure(0.0, cand.v_l))
    segs.append(Flat(cand.v_l, cand.r, fl))
    pool_top = min(cand.v_h, cand.v_t)
    segs.append(
        AffinePower(
            a=cand.r,
            b=pool_top,
            base=fl ** (n - 1),
            slope=cand.beta,
            anchor=cand.r,
            root_power=n - 1,
        )
    )
    if cand.v_h < 1.0:
        segs.append(FullDisclosure(cand.v_h, 1.0))
    elif cand.v_t < 1.0:
        segs.append(Flat(cand.v_t, 1.0, 1.0))
    return PosteriorDistribution(prior=prior, segments=tuple(segs))


def h_gap(g: PosteriorDistribution, prior: Prior, z):
    """Integral of (F - G) from 0 to z; nonnegative for mean-preserving contractions."""
    return prior.cum_cdf(z) - g.cum_integral(z)


@dataclass(frozen=True)
class MpcReport:
    min_gap: float
    mean_error: float
    passed: bool


def verify_mpc(
    g: PosteriorDistribution, prior: Prior, grid_size: int = 2001, tol: float = 1e-9
) -> MpcReport:
    """Grid check that g is a mean-preserving contraction of the prior."""
    if grid_size < 101:
        raise ValueError("grid_size must be at least 101")
    grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_size), g.breakpoints()]))
    gaps = h_gap(g, prior, grid)
    min_gap = float(np.min(gaps))
    mean_error = float(gaps[-1])
    return MpcReport(
        min_gap=min_gap, mean_error=mean_error, passed=min_gap >= -tol and abs(mean_error) <= tol
    )


def validate_candidate(cand: Candidate, grid_size: int = 2001) -> None:
    """Raise ValidationFailureError when a structural invariant fails."""
    prior, n = cand.prior, cand.n
    g = build_g(cand)
    g.validate()
    contact = abs(float(g.cdf(cand.v_h)) - float(prior.cdf(cand.v_h)))
    if contact > 1e-9:
        raise ValidationFailureError("contact-point", f"|G - F|({cand.v_h}) = {contact}")
    mpc = verify_mpc(g, prior, grid_size=grid_size)
    if abs(mpc.mean_error) > 1e-9:
        raise ValidationFailureError("mean-preservation", f"mean gap {mpc.mean_error}")
    if mpc.min_gap < -1e-9:
        raise ValidationFailureError("integrated-gap", f"min gap {mpc.min_gap}")
    tm = prior.truncated_moments(cand.v_l, cand.v_h, n) if cand.v_h > cand.v_l else None
    if tm is not None and tm.mu_tilde > cand.r:
        fln1 = float(prior.cdf(cand.v_l)) ** (n - 1)
        beta_moment = (tm.eta_tilde - fln1) / (tm.mu_tilde - cand.r)
        if abs(beta_moment - cand.beta) > 1e-8 * max(1.0, cand.beta):
            raise ValidationFailureError(
                "slope-moment-form", f"{cand.beta} vs {beta_moment}"
            )
    if cand.v_h < 1.0 and abs(cand.v_t - 1.0) > 1e-12:
        raise ValidationFailureError("top-structure", "v_H < 1 requires v_T = 1")
    if cand.v_t < 1.0 and abs(cand.v_h - 1.0) > 1e-12:
        raise ValidationFailureError("top-structure", "v_T < 1 requires v_H = 1")
