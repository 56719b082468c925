"""Agent-level simulation of the search market.

RNG discipline: counter-based Philox streams keyed by (seed, block index),
one block of consumers per stream.  Totals are reduced in block order, so
serial and parallel execution produce bit-identical reports and any rerun
with the same seed and config reproduces every number exactly.

Savvy consumers visit all firms at zero cost and buy the best draw.
Costly searchers draw a search cost, receive the reservation value the
equilibrium disclosure assigns to that cost, visit firms in a uniformly
random order, stop at the first draw at or above their reservation value,
and otherwise buy the best of all n draws.  Every visit costs the
consumer her search cost, the first one included.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from .candidate import verify_mpc
from .endogenous import Equilibrium
from .errors import DomainError, ValidationFailureError
from .posterior import PosteriorDistribution
from .rootfind import bisect_root
from .verify import ContinuousCosts, CostDistribution, DiscreteCosts

_BLOCK = 1 << 16


@dataclass(frozen=True)
class SingleCost:
    s: float


@dataclass(frozen=True)
class HeterogeneousCosts:
    costs: CostDistribution


CostModel = Union[SingleCost, HeterogeneousCosts]


@dataclass(frozen=True)
class SimConfig:
    consumers: int
    seed: int
    cost_model: CostModel
    bins: int = 50
    n: int | None = None  # taken from the equilibrium when omitted
    alpha: float | None = None
    workers: int | None = None  # default: DISCLOSE_EQ_THREADS or serial

    def __post_init__(self) -> None:
        if self.consumers < 1:
            raise DomainError("need at least one consumer")
        if self.bins < 10:
            raise DomainError("need at least 10 bins")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CurveBin:
    bin_left: float
    bin_right: float
    v_mid: float
    u_hat: float
    se: float
    visits: int


@dataclass(frozen=True)
class SimReport:
    consumers: int
    seed: int
    n_savvy: int
    n_inexperienced: int
    eta_hat: float
    eta_se: float
    cs_savvy_hat: float
    cs_savvy_se: float
    cs_inexperienced_hat: float
    cs_inexperienced_se: float
    firm_sale_shares: tuple[float, ...]
    visit_histogram: tuple[int, ...]
    multi_search_freq: float
    curve: tuple[CurveBin, ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "consumers": self.consumers,
            "seed": self.seed,
            "n_savvy": self.n_savvy,
            "n_inexperienced": self.n_inexperienced,
            "eta_hat": self.eta_hat,
            "eta_se": self.eta_se,
            "cs_savvy_hat": self.cs_savvy_hat,
            "cs_savvy_se": self.cs_savvy_se,
            "cs_inexperienced_hat": self.cs_inexperienced_hat,
            "cs_inexperienced_se": self.cs_inexperienced_se,
            "firm_sale_shares": list(self.firm_sale_shares),
            "visit_histogram": list(self.visit_histogram),
            "multi_search_freq": self.multi_search_freq,
            "conditional_sale_curve": [
                {
                    "bin_left": b.bin_left,
                    "bin_right": b.bin_right,
                    "v_mid": b.v_mid,
                    "u_hat": b.u_hat,
                    "se": b.se,
                    "visits": b.visits,
                }
                for b in self.curve
            ],
        }


def sample_posterior(g: PosteriorDistribution, u01):
    """Inverse-cdf draw(s) from a posterior distribution."""
    return g.sample(u01)


def reservation_for_cost(g: PosteriorDistribution, s: float) -> float:
    """Reservation value solving E[(v - r)+] = s under g."""
    mean = g.mean()
    if not 0.0 < s < mean:
        raise DomainError(f"cost must lie in (0, E_G[v]) = (0, {mean})")
    return bisect_root(lambda r: float(g.excess_above(r)) - s, 0.0, 1.0, xtol=1e-12)


def _reservations_for_costs(g: PosteriorDistribution, costs: np.ndarray) -> np.ndarray:
    """Vectorized bisection of the reservation equation for an array of costs."""
    lo = np.zeros_like(costs)
    hi = np.ones_like(costs)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        too_high = np.asarray(g.excess_above(mid)) < costs
        hi = np.where(too_high, mid, hi)
        lo = np.where(too_high, lo, mid)
    return 0.5 * (lo + hi)


def stop_quantile(g: PosteriorDistribution, r: float) -> float:
    """Quantile below which a draw from g fails the reservation test.

    The stopping rule is applied to the sampling variates rather than the
    sampled values: near the support bottom the pooled cdf can be so steep
    that a reservation value correct to 1e-12 still mislabels a visible
    share of the mass, while in quantile space the rule is exact.  A
    reservation at or below the support bottom never triggers search.
    """
    if r <= g.support_bottom() + 1e-9:
        return 0.0
    return g.cdf_left(r)


def _bin_edges(bins: int, eq: Equilibrium) -> np.ndarray:
    """Roughly `bins` edges over [0, 1]; the reservation value is always an
    edge (the payoff jump must be estimable) and so are the other structural
    breakpoints, which keeps bin averages aligned with midpoint payoffs."""
    base = np.linspace(0.0, 1.0, bins + 1)
    forced = [x for x in (eq.v_l_star, eq.r_star, eq.v_h_star, eq.v_t_star) if 0.0 < x < 1.0]
    edges = np.unique(np.concatenate([base, forced]))
    # drop base edges that crowd a forced breakpoint
    keep = np.ones(len(edges), dtype=bool)
    for x in forced:
        crowding = (np.abs(edges - x) < 0.25 / bins) & (np.abs(edges - x) > 0)
        keep &= ~crowding
    return edges[keep]


@dataclass
class _Totals:
    n_savvy: int = 0
    n_inexp: int = 0
    firm0_visits_inexp: int = 0
    sum_cs_savvy: float = 0.0
    sumsq_cs_savvy: float = 0.0
    sum_cs_inexp: float = 0.0
    sumsq_cs_inexp: float = 0.0
    sales: np.ndarray = field(default_factory=lambda: np.zeros(0))
    visit_hist: np.ndarray = field(default_factory=lambda: np.zeros(0))
    multi: int = 0
    bin_visits: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bin_sales: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def merge(self, other: "_Totals") -> None:
        self.n_savvy += other.n_savvy
        self.n_inexp += other.n_inexp
        self.firm0_visits_inexp += other.firm0_visits_inexp
        self.sum_cs_savvy += other.sum_cs_savvy
        self.sumsq_cs_savvy += other.sumsq_cs_savvy
        self.sum_cs_inexp += other.sum_cs_inexp
        self.sumsq_cs_inexp += other.sumsq_cs_inexp
        self.sales = self.sales + other.sales
        self.visit_hist = self.visit_hist + other.visit_hist
        self.multi += other.multi
        self.bin_visits = self.bin_visits + other.bin_visits
        self.bin_sales = self.bin_sales + other.bin_sales


def _draw_costs(rng: np.random.Generator, model: CostModel, size: int) -> np.ndarray:
    if isinstance(model, SingleCost):
        return np.full(size, model.s)
    costs = model.costs
    u = rng.random(size)
    if isinstance(costs, DiscreteCosts):
        values = np.array([c for c, _ in costs.points])
        cum = np.cumsum([p for _, p in costs.points])
        return values[np.searchsorted(cum, u, side="right")]
    if isinstance(costs, ContinuousCosts):
        xs = [k[0] for k in costs.knots]
        qs = [k[1] for k in costs.knots]
        return np.interp(u, qs, xs)
    raise DomainError(f"unknown cost model {model!r}")


def _simulate_block(
    eq: Equilibrium,
    config: SimConfig,
    block_index: int,
    size: int,
    edges: np.ndarray,
    g_by_firm: list[PosteriorDistribution],
    alpha: float,
    n: int,
    track_firm: int,
) -> _Totals:
    key = np.array([config.seed, block_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    t = _Totals()
    t.sales = np.zeros(n)
    t.visit_hist = np.zeros(n + 1)
    t.bin_visits = np.zeros(len(edges) - 1)
    t.bin_sales = np.zeros(len(edges) - 1)

    is_inexp = rng.random(size) < alpha
    n_inexp = int(np.sum(is_inexp))
    n_savvy = size - n_inexp
    t.n_savvy, t.n_inexp = n_savvy, n_inexp

    uniform_g = len(set(map(id, g_by_firm))) == 1

    def draws_by_firm(rng_draws: np.ndarray) -> np.ndarray:
        """Column j sampled from firm j's distribution."""
        if uniform_g:
            return np.asarray(g_by_firm[0].sample(rng_draws))
        out = np.empty_like(rng_draws)
        for j, g in enumerate(g_by_firm):
            out[:, j] = np.asarray(g.sample(rng_draws[:, j]))
        return out

    # savvy consumers: visit everyone, buy the best draw
    if n_savvy:
        u = rng.random((n_savvy, n))
        vals = draws_by_firm(u)
        best = np.argmax(vals, axis=1)  # ties go to the lowest firm index
        cs = vals[np.arange(n_savvy), best]
        t.sum_cs_savvy = float(np.sum(cs))
        t.sumsq_cs_savvy = float(np.sum(cs * cs))
        np.add.at(t.sales, best, 1)
        idx = np.digitize(vals.ravel(), edges) - 1
        np.clip(idx, 0, len(edges) - 2, out=idx)
        np.add.at(t.bin_visits, idx, 1)
        sold = np.zeros_like(vals, dtype=bool)
        sold[np.arange(n_savvy), best] = True
        np.add.at(t.bin_sales, idx, sold.ravel().astype(float))

    # costly searchers: random order, reservation stopping (in quantile space)
    if n_inexp:
        costs = _draw_costs(rng, config.cost_model, n_inexp)
        if isinstance(config.cost_model, SingleCost):
            uniq = np.array([config.cost_model.s])
            inverse = np.zeros(n_inexp, dtype=int)
        else:
            uniq, inverse = np.unique(costs, return_inverse=True)
        if len(uniq) <= 64:
            r_uniq = np.array([reservation_for_cost(eq.g, c) for c in uniq])
        else:
            r_uniq = _reservations_for_costs(eq.g, uniq)
        q_stop_by_firm = np.array(
            [[stop_quantile(g, r) for r in r_uniq] for g in g_by_firm]
        )  # (firm, cost) stop quantiles
        order = np.argsort(rng.random((n_inexp, n)), axis=1)  # firm at each position
        u = rng.random((n_inexp, n))
        # value drawn at each *position*, from the firm visited there
        if uniform_g:
            vals = np.asarray(g_by_firm[0].sample(u))
            q_stop = q_stop_by_firm[0][inverse]  # same for every position
            hit = u >= q_stop[:, None]
        else:
            vals = np.empty_like(u)
            hit = np.empty_like(u, dtype=bool)
            for j in range(n):
                col_firm = order[:, j]
                for f, g in enumerate(g_by_firm):
                    sel = col_firm == f
                    if np.any(sel):
                        vals[sel, j] = np.asarray(g.sample(u[sel, j]))
                        hit[sel, j] = u[sel, j] >= q_stop_by_firm[f][inverse[sel]]
        any_hit = hit.any(axis=1)
        first_hit = np.argmax(hit, axis=1)
        visits = np.where(any_hit, first_hit + 1, n)
        stop_pos = np.where(any_hit, first_hit, np.argmax(vals, axis=1))
        rows = np.arange(n_inexp)
        bought_value = vals[rows, stop_pos]
        bought_firm = order[rows, stop_pos]
        cs = bought_value - visits * costs
        t.sum_cs_inexp = float(np.sum(cs))
        t.sumsq_cs_inexp = float(np.sum(cs * cs))
        np.add.at(t.sales, bought_firm, 1)
        np.add.at(t.visit_hist, visits, 1)
        t.multi = int(np.sum(visits > 1))
        pos_of_tracked = np.argmax(order == track_firm, axis=1)
        t.firm0_visits_inexp = int(np.sum(pos_of_tracked < visits))
        visited_mask = np.arange(n)[None, :] < visits[:, None]
        sold = np.zeros_like(vals, dtype=bool)
        sold[rows, stop_pos] = True
        vis_vals = vals[visited_mask]
        idx = np.digitize(vis_vals, edges) - 1
        np.clip(idx, 0, len(edges) - 2, out=idx)
        np.add.at(t.bin_visits, idx, 1)
        np.add.at(t.bin_sales, idx, sold[visited_mask].astype(float))
    return t


def _run_blocks(eq, config, g_by_firm, track_firm: int = 0) -> tuple[_Totals, np.ndarray]:
    n = config.n if config.n is not None else eq.n
    alpha = config.alpha if config.alpha is not None else eq.alpha
    if n != eq.n:
        raise DomainError("config n must match the equilibrium")
    if alpha != eq.alpha:
        raise DomainError("config alpha must match the equilibrium")
    edges = _bin_edges(config.bins, eq)
    sizes = []
    remaining = config.consumers
    while remaining > 0:
        sizes.append(min(_BLOCK, remaining))
        remaining -= sizes[-1]

    workers = config.workers
    if workers is None:
        workers = int(os.environ.get("DISCLOSE_EQ_THREADS", "1"))
    workers = max(1, workers)

    def run(i_size):
        i, size = i_size
        return i, _simulate_block(
            eq, config, i, size, edges, g_by_firm, alpha, n, track_firm
        )

    results: dict[int, _Totals] = {}
    if workers == 1:
        for item in enumerate(sizes):
            i, tot = run(item)
            results[i] = tot
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, tot in pool.map(run, enumerate(sizes)):
                results[i] = tot
    total = results[0]
    for i in range(1, len(sizes)):
        total.merge(results[i])
    return total, edges


def _se_mean(total: float, total_sq: float, count: int) -> float:
    if count < 2:
        return float("nan")
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return float(np.sqrt(var / count))


def simulate_market(eq: Equilibrium, config: SimConfig) -> SimReport:
    """Simulate the market under the equilibrium disclosure."""
    n = config.n if config.n is not None else eq.n
    total, edges = _run_blocks(eq, config, [eq.g] * n)
    return _report_from_totals(eq, config, total, edges)


def _report_from_totals(eq, config, t: _Totals, edges: np.ndarray) -> SimReport:
    n_cons = config.consumers
    eta_hat = t.firm0_visits_inexp / t.n_inexp if t.n_inexp else float("nan")
    eta_se = (
        float(np.sqrt(max(eta_hat * (1 - eta_hat), 0.0) / t.n_inexp))
        if t.n_inexp
        else float("nan")
    )
    curve = []
    with np.errstate(invalid="ignore", divide="ignore"):
        u_hat = np.where(t.bin_visits > 0, t.bin_sales / np.maximum(t.bin_visits, 1), np.nan)
        se = np.sqrt(
            np.maximum(u_hat * (1 - u_hat), 0.0) / np.maximum(t.bin_visits, 1)
        )
    for k in range(len(edges) - 1):
        curve.append(
            CurveBin(
                bin_left=float(edges[k]),
                bin_right=float(edges[k + 1]),
                v_mid=float(0.5 * (edges[k] + edges[k + 1])),
                u_hat=float(u_hat[k]),
                se=float(se[k]),
                visits=int(t.bin_visits[k]),
            )
        )
    shares = tuple(float(x) / n_cons for x in t.sales)
    return SimReport(
        consumers=n_cons,
        seed=config.seed,
        n_savvy=t.n_savvy,
        n_inexperienced=t.n_inexp,
        eta_hat=float(eta_hat),
        eta_se=eta_se,
        cs_savvy_hat=t.sum_cs_savvy / t.n_savvy if t.n_savvy else float("nan"),
        cs_savvy_se=_se_mean(t.sum_cs_savvy, t.sumsq_cs_savvy, t.n_savvy),
        cs_inexperienced_hat=t.sum_cs_inexp / t.n_inexp if t.n_inexp else float("nan"),
        cs_inexperienced_se=_se_mean(t.sum_cs_inexp, t.sumsq_cs_inexp, t.n_inexp),
        firm_sale_shares=shares,
        visit_histogram=tuple(int(x) for x in t.visit_hist),
        multi_search_freq=t.multi / t.n_inexp if t.n_inexp else 0.0,
        curve=tuple(curve),
    )


def simulate_deviation(
    eq: Equilibrium,
    firm_index: int,
    g_dev: PosteriorDistribution,
    config: SimConfig,
) -> tuple[float, float]:
    """Sale share (and s.e.) of one firm deviating to g_dev.

    Consumers keep the reservation values implied by the equilibrium
    disclosure (passive beliefs); only the deviant's draws change.
    """
    n = config.n if config.n is not None else eq.n
    if not 0 <= firm_index < n:
        raise DomainError("firm_index out of range")
    report = verify_mpc(g_dev, eq.prior)
    if not report.passed:
        raise ValidationFailureError(
            "deviation-not-mpc",
            f"min_gap={report.min_gap}, mean_error={report.mean_error}",
        )
    g_by_firm = [eq.g] * n
    g_by_firm[firm_index] = g_dev
    total, _ = _run_blocks(eq, config, g_by_firm, track_firm=firm_index)
    share = float(total.sales[firm_index]) / config.consumers
    se = float(np.sqrt(max(share * (1 - share), 0.0) / config.consumers))
    return share, se
