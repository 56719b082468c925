"""Independent optimality certification of solved markets.

Three routes, deliberately redundant:

* the closed-form multiplier and the four concavification optimality
  checks (continuity/convexity, domination, contact on the support, and
  the integral identity), all evaluated analytically or on dense grids;
* a discretized linear-program best response over the exact feasible
  polytope (nonnegativity, unit mass, matched mean, and stop-loss
  dominance at every grid point), solved with scipy's HiGHS backend;
* direct expected-payoff comparisons for hand-built deviations.

The cost-heterogeneity check implements the large-market sufficiency
condition: the multiplier's pooled slope must stay below the steepest
chord of the heterogeneous payoff under the reservation value.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .candidate import verify_mpc
from .endogenous import solve_endog
from .errors import DomainError, ValidationFailureError
from .posterior import Flat, FullDisclosure, PosteriorDistribution
from .priors import Prior

_GL_NODES = 32


# ---------------------------------------------------------------------------
# payoff and multiplier
# ---------------------------------------------------------------------------

def payoff_u(eq, v):
    """Sale probability conditional on a visit, at posterior mean v.

    Upper-semicontinuous at the reservation value (the stopping branch
    applies at r itself).  Works for any market-like object exposing
    g, r_star, eta, alpha_tilde, n.
    """
    at = eq.alpha_tilde
    g_pow = np.asarray(eq.g.cdf(v)) ** (eq.n - 1)
    low = (at / eq.eta + 1.0 - at) * g_pow
    high = at + (1.0 - at) * g_pow
    out = np.where(np.asarray(v) >= eq.r_star, high, low)
    return float(out) if np.ndim(v) == 0 else out


def multiplier_phi(eq, v):
    """The piecewise multiplier supporting the candidate disclosure."""
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    f_pow = np.asarray(prior.cdf(arr)) ** (n - 1)
    fln1 = float(prior.cdf(eq.v_l_star)) ** (n - 1)
    mid = at + (1.0 - at) * (fln1 + eq.beta_star * (arr - eq.r_star))
    out = np.where(
        arr < eq.v_l_star,
        (at / eq.eta + 1.0 - at) * f_pow,
        np.where(arr <= eq.v_h_star, mid, at + (1.0 - at) * f_pow),
    )
    return float(out[0]) if np.ndim(v) == 0 else out


@dataclass(frozen=True)
class CertificateReport:
    dm1_convex: bool
    dm1_max_continuity_gap: float
    dm1_min_slope_increment: float
    dm2_min_gap: float
    dm3_max_contact_violation: float
    dm4_integral_gap: float
    passed: bool

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dm1_convex": self.dm1_convex,
            "dm1_max_continuity_gap": self.dm1_max_continuity_gap,
            "dm1_min_slope_increment": self.dm1_min_slope_increment,
            "dm2_min_gap": self.dm2_min_gap,
            "dm3_max_contact_violation": self.dm3_max_contact_violation,
            "dm4_integral_gap": self.dm4_integral_gap,
            "pass": self.passed,
        }


def _support_grid(eq, grid_size: int) -> np.ndarray:
    """Grid over the support of the disclosure (where contact must hold)."""
    pool_top = min(eq.v_h_star, eq.v_t_star)
    pieces = [np.linspace(eq.r_star, pool_top, grid_size // 2)]
    if eq.v_l_star > 0.0:
        pieces.append(np.linspace(0.0, eq.v_l_star, grid_size // 4 + 2))
    if eq.v_h_star < 1.0:
        pieces.append(np.linspace(eq.v_h_star, 1.0, grid_size // 4 + 2))
    return np.unique(np.concatenate(pieces))


def expected_payoff(eq) -> float:
    """Closed-form expected payoff of a firm playing the market disclosure."""
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    fl = float(prior.cdf(eq.v_l_star))
    c_low = at / eq.eta + 1.0 - at
    total = c_low * fl**n / n  # disclosed stretch below v_L (G = F there)
    pool_top = min(eq.v_h_star, eq.v_t_star)
    g_top = float(eq.g.cdf(pool_top))
    # pooled stretch: integral of (at + (1-at) G^(n-1)) dG = at*mass + (1-at)*d(G^n)/n
    total += at * (g_top - fl) + (1.0 - at) * (g_top**n - fl**n) / n
    if eq.v_h_star < 1.0:
        fh = float(prior.cdf(eq.v_h_star))
        total += at * (1.0 - fh) + (1.0 - at) * (1.0 - fh**n) / n
    return total


def payoff_identity_gap(eq) -> float:
    """Difference between the expected payoff and its symmetry benchmark."""
    benchmark = (1.0 / eq.n) / (eq.alpha * eq.eta + 1.0 - eq.alpha)
    return expected_payoff(eq) - benchmark


def integral_phi_dF(eq) -> float:
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    fl = float(prior.cdf(eq.v_l_star))
    fh = float(prior.cdf(eq.v_h_star))
    fln1 = fl ** (n - 1)
    c_low = at / eq.eta + 1.0 - at
    total = c_low * fl**n / n
    const = at + (1.0 - at) * (fln1 - eq.beta_star * eq.r_star)
    total += const * (fh - fl) + (1.0 - at) * eq.beta_star * prior.partial_vf(
        eq.v_l_star, eq.v_h_star
    )
    total += at * (1.0 - fh) + (1.0 - at) * (1.0 - fh**n) / n
    return total


def integral_phi_dG(eq) -> float:
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    g = eq.g
    fl = float(prior.cdf(eq.v_l_star))
    fh = float(prior.cdf(eq.v_h_star))
    fln1 = fl ** (n - 1)
    c_low = at / eq.eta + 1.0 - at
    total = c_low * fl**n / n  # G = F below v_L
    pool_top = min(eq.v_h_star, eq.v_t_star)
    const = at + (1.0 - at) * (fln1 - eq.beta_star * eq.r_star)
    g_top = float(g.cdf(pool_top))
    mass = g_top - fl
    # integral of v dG over the pooled stretch, by parts
    v_dg = pool_top * g_top - eq.r_star * fl - float(
        g.cum_integral(pool_top) - g.cum_integral(eq.r_star)
    )
    total += const * mass + (1.0 - at) * eq.beta_star * v_dg
    if eq.v_h_star < 1.0:
        total += at * (1.0 - fh) + (1.0 - at) * (1.0 - fh**n) / n
    return total


def _phi_branch_limits(eq, b: float) -> tuple[float, float]:
    """Exact left/right limits of the multiplier at a branch seam b."""
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    fln1 = float(prior.cdf(eq.v_l_star)) ** (n - 1)

    def low(v: float) -> float:
        return (at / eq.eta + 1.0 - at) * float(prior.cdf(v)) ** (n - 1)

    def mid(v: float) -> float:
        return at + (1.0 - at) * (fln1 + eq.beta_star * (v - eq.r_star))

    def high(v: float) -> float:
        return at + (1.0 - at) * float(prior.cdf(v)) ** (n - 1)

    if b == eq.v_l_star:
        return low(b), mid(b)
    return mid(b), high(b)


def check_dm_conditions(eq, grid_size: int = 1001) -> CertificateReport:
    """Evaluate the four optimality conditions for the market's multiplier.

    The seam gaps and kink slope increments are evaluated from the branch
    formulas (grid differencing would divide solver residuals by arbitrary
    spacings); convexity inside each smooth branch is a grid check.
    """
    if grid_size < 501:
        raise DomainError("grid_size must be at least 501")
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    breaks = [eq.v_l_star, eq.r_star, eq.v_h_star, eq.v_t_star]
    grid = np.unique(
        np.clip(np.concatenate([np.linspace(0.0, 1.0, grid_size), breaks]), 0.0, 1.0)
    )
    phi = multiplier_phi(eq, grid)
    u = payoff_u(eq, grid)

    # DM1 continuity at interior seams
    gaps = [0.0]
    for b in (eq.v_l_star, eq.v_h_star):
        if 0.0 < b < 1.0:
            left, right = _phi_branch_limits(eq, b)
            gaps.append(abs(right - left))
    max_cont_gap = max(gaps)

    # DM1 convexity: analytic kink increments plus per-branch slope scans
    c_low = at / eq.eta + 1.0 - at
    increments = [0.0]
    if eq.v_l_star > 0.0:
        increments.append(
            (1.0 - at) * eq.beta_star - c_low * prior.pow_cdf_deriv(eq.v_l_star, n)
        )
    if eq.v_h_star < 1.0:
        increments.append((1.0 - at) * (prior.pow_cdf_deriv(eq.v_h_star, n) - eq.beta_star))
    pieces = [(0.0, eq.v_l_star), (eq.v_l_star, eq.v_h_star), (eq.v_h_star, 1.0)]
    for lo, hi in pieces:
        if hi - lo < 1e-9:
            continue
        # stay strictly inside the branch so solver-residual seam jumps
        # cannot leak into the slope differences
        shrink = 1e-9 * (hi - lo)
        sub = np.linspace(lo + shrink, hi - shrink, max(grid_size // 3, 101))
        slopes = np.diff(multiplier_phi(eq, sub)) / np.diff(sub)
        if len(slopes) > 1:
            increments.append(float(np.min(np.diff(slopes))))
    min_slope_inc = min(increments)
    dm1 = max_cont_gap <= 1e-9 and min_slope_inc >= -1e-9

    dm2_min_gap = float(np.min(phi - u))

    sup = _support_grid(eq, grid_size)
    dm3 = float(np.max(np.abs(multiplier_phi(eq, sup) - payoff_u(eq, sup))))

    dm4 = abs(integral_phi_dG(eq) - integral_phi_dF(eq))

    passed = dm1 and dm2_min_gap >= -1e-9 and dm3 <= 1e-8 and dm4 <= 1e-8
    return CertificateReport(
        dm1_convex=dm1,
        dm1_max_continuity_gap=max_cont_gap,
        dm1_min_slope_increment=min_slope_inc,
        dm2_min_gap=dm2_min_gap,
        dm3_max_contact_violation=dm3,
        dm4_integral_gap=dm4,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# LP best-response oracle
# ---------------------------------------------------------------------------

def oracle_grid(eq, m: int) -> np.ndarray:
    """m-point grid including the payoff breakpoints."""
    if m < 101:
        raise DomainError("oracle grid needs at least 101 points")
    base = np.linspace(0.0, 1.0, m)
    forced = [eq.v_l_star, eq.r_star, eq.v_h_star, eq.v_t_star]
    return np.unique(np.concatenate([base, forced]))


def discretize_prior(prior: Prior, grid: np.ndarray) -> np.ndarray:
    """Cell masses of the prior around each grid point (midpoint cells)."""
    mids = np.concatenate([[0.0], 0.5 * (grid[1:] + grid[:-1]), [1.0]])
    cdf_vals = np.asarray(prior.cdf(mids))
    return np.diff(cdf_vals)


def best_response_oracle(
    u_values: Sequence[float], prior: Prior, grid: Sequence[float]
) -> tuple[float, np.ndarray]:
    """Exact finite LP best response over discrete mean-preserving contractions.

    max sum g_i u_i  s.t.  g >= 0, sum g = 1, sum g v = sum f v, and for
    every grid point t: sum g_i (t - v_i)+ <= sum f_i (t - v_i)+.
    """
    grid = np.asarray(grid, dtype=float)
    u_values = np.asarray(u_values, dtype=float)
    if grid.ndim != 1 or grid.shape != u_values.shape:
        raise DomainError("grid and u_values must be 1-d arrays of equal length")
    f = discretize_prior(prior, grid)
    # stop-loss matrix: A[k, i] = (t_k - v_i)+
    a_ub = np.maximum(grid[:, None] - grid[None, :], 0.0)
    b_ub = a_ub @ f
    a_eq = np.vstack([np.ones_like(grid), grid])
    b_eq = np.array([1.0, float(grid @ f)])
    res = linprog(
        -u_values,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0.0, None),
        method="highs",
    )
    if not res.success:  # pragma: no cover - the prior's own cells are feasible
        raise ValidationFailureError("oracle-lp", res.message)
    return -float(res.fun), np.asarray(res.x)


def oracle_gap(eq, m: int) -> dict[str, float]:
    """LP optimum against the market payoff, and its gap to the played value."""
    grid = oracle_grid(eq, m)
    value, masses = best_response_oracle(payoff_u(eq, grid), eq.prior, grid)
    played = expected_payoff(eq)
    return {
        "m": float(len(grid)),
        "oracle_value": value,
        "played_value": played,
        "gap": value - played,
    }


# ---------------------------------------------------------------------------
# deviation gains
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_NODES)


def _quad(fn, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    x = mid + half * _GL_X
    return float(half * np.sum(_GL_W * fn(x)))


def expected_payoff_under(eq, g_dev: PosteriorDistribution) -> float:
    """Expected payoff of deviating to g_dev while the market plays eq.

    Closed form wherever the integrand is polynomial against the deviation
    cdf; Gauss-Legendre per cell otherwise.  Atoms contribute mass times
    the (upper-semicontinuous) payoff at their location.
    """
    prior, n, at = eq.prior, eq.n, eq.alpha_tilde
    c_low = at / eq.eta + 1.0 - at
    fln1 = float(prior.cdf(eq.v_l_star)) ** (n - 1)
    cuts = sorted(
        set(g_dev.breakpoints())
        | {eq.v_l_star, eq.r_star, min(eq.v_h_star, eq.v_t_star), eq.v_h_star}
    )
    total = 0.0
    for seg in g_dev.segments:
        for lo, hi in zip(cuts, cuts[1:]):
            lo_c, hi_c = max(lo, seg.a), min(hi, seg.b)
            if hi_c <= lo_c:
                continue
            total += _cell_payoff(eq, seg, lo_c, hi_c, c_low, fln1)
    if g_dev.atom is not None:
        loc, mass = g_dev.atom
        total += mass * float(payoff_u(eq, loc))
    return total


def _cell_payoff(eq, seg, lo: float, hi: float, c_low: float, fln1: float) -> float:
    """Integral of u dG_dev over one smooth cell."""
    prior, n = eq.prior, eq.n
    if isinstance(seg, Flat):
        return 0.0
    mid = 0.5 * (lo + hi)
    below = mid < eq.r_star
    pool_top = min(eq.v_h_star, eq.v_t_star)
    at = eq.alpha_tilde

    # piecewise closed forms keyed on (payoff branch, deviation segment kind)
    if isinstance(seg, FullDisclosure):
        if below and mid <= eq.v_l_star:
            # u = c_low * F^(n-1), dG = dF
            return c_low * float(
                prior.cdf(hi) ** n - prior.cdf(lo) ** n
            ) / n
        if below:
            return c_low * fln1 * float(prior.cdf(hi) - prior.cdf(lo))
        if mid <= pool_top:
            # u affine in v on the pooled interval
            const = at + (1.0 - at) * (fln1 - eq.beta_star * eq.r_star)
            slope = (1.0 - at) * eq.beta_star
            mass = float(prior.cdf(hi) - prior.cdf(lo))
            return const * mass + slope * prior.partial_vf(lo, hi)
        if eq.v_h_star < 1.0 and mid > eq.v_h_star:
            return at * float(prior.cdf(hi) - prior.cdf(lo)) + (1.0 - at) * float(
                prior.cdf(hi) ** n - prior.cdf(lo) ** n
            ) / n
        # above the pooled cap but below 1: u = at + (1-at)*1
        return float(prior.cdf(hi) - prior.cdf(lo))
    # affine-power deviation segment
    dev = seg

    def dev_cdf(x):
        w = np.clip(dev.base + dev.slope * (x - dev.anchor), 0.0, 1.0)
        return w ** (1.0 / dev.root_power)

    def dev_pdf(x):
        w = np.clip(dev.base + dev.slope * (x - dev.anchor), 1e-300, 1.0)
        return (dev.slope / dev.root_power) * w ** (1.0 / dev.root_power - 1.0)

    if below and mid > eq.v_l_star:
        return c_low * fln1 * float(dev_cdf(hi) - dev_cdf(lo))
    if not below and mid <= pool_top:
        const = at + (1.0 - at) * (fln1 - eq.beta_star * eq.r_star)
        slope = (1.0 - at) * eq.beta_star
        mass = float(dev_cdf(hi) - dev_cdf(lo))
        # integral of v dG by parts against the deviation segment
        v_dg = hi * float(dev_cdf(hi)) - lo * float(dev_cdf(lo)) - float(
            PosteriorDistribution(prior=prior, segments=(dev,))._seg_integral(dev, lo, hi)
        )
        return const * mass + slope * v_dg
    if not below and mid > pool_top and eq.v_h_star >= 1.0:
        return float(dev_cdf(hi) - dev_cdf(lo))  # u = 1 above the pooled cap
    # remaining combination (u ~ F^(n-1) shape against an affine-power
    # deviation): quadrature
    return _quad(lambda x: np.asarray(payoff_u(eq, x)) * dev_pdf(x), lo, hi)


def deviation_gain(eq, g_dev: PosteriorDistribution) -> float:
    """Payoff change from a unilateral deviation to g_dev (beliefs fixed)."""
    report = verify_mpc(g_dev, eq.prior)
    if not report.passed:
        raise ValidationFailureError(
            "deviation-not-mpc",
            f"min_gap={report.min_gap}, mean_error={report.mean_error}",
        )
    return expected_payoff_under(eq, g_dev) - expected_payoff(eq)


# ---------------------------------------------------------------------------
# cost-heterogeneity sufficiency check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteCosts:
    """Finite-support search-cost distribution: ((cost, prob), ...)."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        costs = [c for c, _ in self.points]
        probs = [p for _, p in self.points]
        if not costs or any(c <= 0.0 for c in costs):
            raise DomainError("costs must be strictly positive")
        if any(b <= a for a, b in zip(costs, costs[1:])):
            raise DomainError("costs must be strictly increasing")
        if any(p <= 0.0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise DomainError("probabilities must be positive and sum to 1")

    @property
    def s_min(self) -> float:
        return self.points[0][0]

    @property
    def s_max(self) -> float:
        return self.points[-1][0]

    def cdf(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xs)
        for c, p in self.points:
            out += np.where(xs >= c, p, 0.0)
        return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class ContinuousCosts:
    """Piecewise-linear cost cdf on [s_1, s_k] with positive density at s_1."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.knots) < 2:
            raise DomainError("need at least two knots")
        xs = [k[0] for k in self.knots]
        qs = [k[1] for k in self.knots]
        if xs[0] <= 0.0:
            raise DomainError("lowest cost must be strictly positive")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("cost knots must be strictly increasing")
        if abs(qs[0]) > 1e-15 or abs(qs[-1] - 1.0) > 1e-12:
            raise DomainError("cost cdf must run from 0 to 1")
        if any(b < a for a, b in zip(qs, qs[1:])):
            raise DomainError("cost cdf must be nondecreasing")
        if self.density_at_min <= 0.0:
            raise DomainError("density at the lowest cost must be positive")

    @property
    def s_min(self) -> float:
        return self.knots[0][0]

    @property
    def s_max(self) -> float:
        return self.knots[-1][0]

    @property
    def density_at_min(self) -> float:
        (x0, q0), (x1, q1) = self.knots[0], self.knots[1]
        return (q1 - q0) / (x1 - x0)

    def cdf(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.interp(xs, [k[0] for k in self.knots], [k[1] for k in self.knots])
        out = np.where(xs < self.s_min, 0.0, out)
        out = np.where(xs >= self.s_max, 1.0, out)
        return float(out[0]) if np.ndim(x) == 0 else out


CostDistribution = Union[DiscreteCosts, ContinuousCosts]


def cost_distribution_from_json(spec: dict[str, Any]) -> CostDistribution:
    from .errors import ConfigError

    try:
        kind = spec["type"]
        if kind == "discrete":
            return DiscreteCosts(points=tuple((float(c), float(p)) for c, p in spec["points"]))
        if kind == "continuous":
            return ContinuousCosts(knots=tuple((float(x), float(q)) for x, q in spec["knots"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed cost distribution: {exc}") from exc
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown cost distribution type {spec.get('type')!r}")


def chord_slope_infimum(costs: CostDistribution, mu: float, r_1: float) -> float:
    """inf over v in [0, r_1) of K(mu - v) / (r_1 - v).

    For discrete costs the infimum is attained at v = 0 or just past the
    jump points (where K drops); for piecewise-linear costs each piece is
    monotone so knot images plus the lowest-cost density limit suffice.
    """
    candidates = [float(costs.cdf(mu)) / r_1]
    if isinstance(costs, DiscreteCosts):
        cum = 0.0
        for c, p in costs.points:
            if c > costs.s_min and mu - c > 0.0 and c - costs.s_min > 0.0:
                # value just past v = mu - c, where K has dropped to cum
                candidates.append(cum / (c - costs.s_min))
            cum += p
    else:
        candidates.append(costs.density_at_min)
        for x, _ in costs.knots:
            v = mu - x
            if 0.0 < v < r_1:
                candidates.append(float(costs.cdf(mu - v)) / (r_1 - v))
    return min(candidates)


@dataclass(frozen=True)
class HeteroReport:
    holds: bool
    b_star: float
    lhs: float
    rhs: float
    phi_vs_uk_min_gap: float
    n: int
    s_1: float
    r_1: float
    beta_star: float
    alpha_tilde: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "b_star": self.b_star,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "phi_vs_uK_min_gap": self.phi_vs_uk_min_gap,
            "n": self.n,
            "s_1": self.s_1,
            "r_1": self.r_1,
            "beta_star": self.beta_star,
            "alpha_tilde": self.alpha_tilde,
        }


def hetero_check(prior: Prior, n: int, alpha: float, costs: CostDistribution) -> HeteroReport:
    """Sufficiency check that the lowest-cost equilibrium survives cost mixing."""
    mu = prior.mean()
    if costs.s_min <= 0.0:
        raise DomainError("lowest cost must be strictly positive")
    if costs.s_max >= mu:
        raise DomainError(f"cost support must stay below the prior mean {mu}")
    eq = solve_endog(prior, n, alpha, costs.s_min)
    if eq.bottom_disclosure:
        raise ValidationFailureError(
            "hetero-precondition",
            f"n={n} is below the concealment threshold for s_1={costs.s_min}",
        )
    r_1 = eq.r_star
    b_star = chord_slope_infimum(costs, mu, r_1)
    lhs = (1.0 - eq.alpha_tilde) * eq.beta_star
    rhs = eq.alpha_tilde * b_star
    grid = np.linspace(0.0, r_1, 2001)
    u_k = eq.alpha_tilde * (1.0 - np.asarray(costs.cdf(mu - grid)))
    gap = float(np.min(multiplier_phi(eq, grid) - u_k))
    return HeteroReport(
        holds=lhs < rhs,
        b_star=b_star,
        lhs=lhs,
        rhs=rhs,
        phi_vs_uk_min_gap=gap,
        n=n,
        s_1=costs.s_min,
        r_1=r_1,
        beta_star=eq.beta_star,
        alpha_tilde=eq.alpha_tilde,
    )


def hetero_first_holding_n(
    prior: Prior, alpha: float, costs: CostDistribution, n_start: int = 2, n_cap: int = 1 << 20
) -> tuple[int, HeteroReport]:
    """First n on a doubling scan at which the sufficiency condition holds."""
    n = n_start
    while n <= n_cap:
        try:
            report = hetero_check(prior, n, alpha, costs)
            if report.holds:
                return n, report
        except ValidationFailureError:
            pass  # below the concealment threshold; keep doubling
        n *= 2
    from .errors import IterationCapError

    raise IterationCapError(f"sufficiency never held up to n = {n_cap}")
