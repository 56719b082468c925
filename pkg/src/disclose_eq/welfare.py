"""Consumer surplus, informativeness ordering, and search-cost scans.

Surplus is computed on the cdf side (E[max of n draws] equals the top of
the support minus the integral of cdf**n), which handles atoms as flat
cdf steps with no density bookkeeping.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .endogenous import Equilibrium, solve_endog
from .errors import DomainError
from .exogenous import r_lower_bar
from .posterior import Flat, FullDisclosure, PosteriorDistribution
from .priors import Prior

LESS_INFORMATIVE = "LessInformative"
MORE_INFORMATIVE = "MoreInformative"
EQUALLY_INFORMATIVE = "EquallyInformative"
INCOMPARABLE = "Incomparable"

_TOL = 1e-9


@dataclass(frozen=True)
class SurplusReport:
    cs_savvy: float
    cs_inexperienced: float
    regime_note: str


@dataclass(frozen=True)
class InformativenessVerdict:
    verdict: str
    min_gap_forward: float
    min_gap_backward: float
    mean_gap: float


@dataclass(frozen=True)
class ThresholdReport:
    s_bar: float
    s_lower_est: float
    s_tilde_est: float | None
    grid_resolution: float
    flags: dict[str, bool]
    rows: tuple[dict[str, Any], ...]


def cs_savvy(g: PosteriorDistribution, n: int) -> float:
    """Expected maximum of n independent draws from g."""
    if n < 1:
        raise DomainError("need n >= 1")
    top = g.top
    return top - float(g.pow_cum_integral(top, n))


def censored_value_distribution(eq: Equilibrium) -> PosteriorDistribution:
    """Distribution of min(v, r*): the per-visit value a costly searcher banks."""
    prior = eq.prior
    fl = float(prior.cdf(eq.v_l_star))
    segs: list = []
    if eq.v_l_star > 0.0:
        segs.append(FullDisclosure(0.0, eq.v_l_star))
    segs.append(Flat(eq.v_l_star, eq.r_star, fl))
    return PosteriorDistribution(
        prior=prior, segments=tuple(segs), atom=(eq.r_star, 1.0 - fl)
    )


def cs_inexperienced(eq: Equilibrium) -> float:
    """Costly searcher's expected surplus: E[max of n censored draws]."""
    g_tilde = censored_value_distribution(eq)
    return eq.r_star - float(g_tilde.pow_cum_integral(eq.r_star, eq.n))


def surplus_report(eq: Equilibrium) -> SurplusReport:
    note = "stops at first visit" if not eq.bottom_disclosure else "searches actively"
    return SurplusReport(
        cs_savvy=cs_savvy(eq.g, eq.n),
        cs_inexperienced=cs_inexperienced(eq),
        regime_note=note,
    )


def informativeness_compare(
    g0: PosteriorDistribution, g1: PosteriorDistribution, grid_size: int = 1001
) -> InformativenessVerdict:
    """Rank g0 against g1 by integral precision.

    LessInformative means g0 is a mean-preserving contraction of g1.
    Incomparability is an ordinary outcome, not an error.
    """
    grid = np.unique(
        np.concatenate(
            [np.linspace(0.0, 1.0, grid_size), g0.breakpoints(), g1.breakpoints()]
        )
    )
    delta = np.asarray(g1.cum_integral(grid)) - np.asarray(g0.cum_integral(grid))
    mean_gap = float(delta[-1])
    min_fwd = float(np.min(delta))
    min_bwd = float(np.min(-delta))
    means_match = abs(mean_gap) <= _TOL
    g0_less = means_match and min_fwd >= -_TOL
    g0_more = means_match and min_bwd >= -_TOL
    if g0_less and g0_more:
        verdict = EQUALLY_INFORMATIVE
    elif g0_less:
        verdict = LESS_INFORMATIVE
    elif g0_more:
        verdict = MORE_INFORMATIVE
    else:
        verdict = INCOMPARABLE
    return InformativenessVerdict(
        verdict=verdict,
        min_gap_forward=min_fwd,
        min_gap_backward=min_bwd,
        mean_gap=mean_gap,
    )


def search_stats(eq: Equilibrium) -> dict[str, float]:
    """Search behavior implied by the equilibrium disclosure."""
    fl = float(eq.prior.cdf(eq.v_l_star))
    if fl < 1.0:
        expected_visits = (1.0 - fl**eq.n) / (1.0 - fl)
    else:  # pragma: no cover - requires v_L at the support top
        expected_visits = float(eq.n)
    return {
        "p_stop_first": 1.0 - fl,
        "p_multi_visit": fl,
        "expected_visits": expected_visits,
        "eta": eq.eta,
        "alpha_tilde": eq.alpha_tilde,
    }


def equilibrium_row(eq: Equilibrium, prev: Equilibrium | None) -> dict[str, Any]:
    """One comparative-statics record, with the verdict against the previous point."""
    stats = search_stats(eq)
    verdict = ""
    if prev is not None:
        verdict = informativeness_compare(eq.g, prev.g).verdict
    return {
        "r_star": eq.r_star,
        "v_L_star": eq.v_l_star,
        "v_H_star": eq.v_h_star,
        "v_T_star": eq.v_t_star,
        "beta_star": eq.beta_star,
        "cs_savvy": cs_savvy(eq.g, eq.n),
        "cs_inexperienced": cs_inexperienced(eq),
        "p_multi_visit": stats["p_multi_visit"],
        "verdict_vs_prev": verdict,
    }


def threshold_scan(
    prior: Prior, n: int, alpha: float, s_grid: Sequence[float]
) -> ThresholdReport:
    """Map the search-cost comparative statics along a grid.

    s_bar is exact (mu minus the concealment threshold); the other two
    markers are located on the grid and are only as sharp as its spacing.
    """
    s_grid = list(s_grid)
    mu = prior.mean()
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise DomainError("s_grid must be strictly increasing")
    if s_grid[0] <= 0.0 or s_grid[-1] >= mu:
        raise DomainError(f"s_grid must lie inside (0, {mu})")

    s_bar = mu - r_lower_bar(prior, n, alpha)
    solved: list[tuple[float, Equilibrium]] = []
    rows: list[dict[str, Any]] = []
    prev: Equilibrium | None = None
    for s in s_grid:
        eq = solve_endog(prior, n, alpha, s)
        row = {"s": s}
        row.update(equilibrium_row(eq, prev))
        rows.append(row)
        solved.append((s, eq))
        prev = eq

    # largest prefix of the grid on which there is no disclosure at the top,
    # capped at s_bar (the two thresholds are ordered)
    s_lower = s_grid[0]
    for s, eq in solved:
        if eq.v_t_star < 1.0 - 1e-12:
            s_lower = s
        else:
            break
    s_lower_est = min(s_lower, s_bar)

    # for the largest grid point below s_lower: how far down the grid every
    # smaller cost is strictly better on all three counts
    s_tilde_est: float | None = None
    ref = None
    for s, eq in solved:
        if s <= s_lower_est:
            ref = (s, eq)
    if ref is not None:
        ref_s, ref_eq = ref
        ref_css = cs_savvy(ref_eq.g, n)
        ref_csi = cs_inexperienced(ref_eq)
        candidates = [(s, eq) for s, eq in solved if s < ref_s]
        best = None
        for s, eq in sorted(candidates, reverse=True):
            v = informativeness_compare(eq.g, ref_eq.g).verdict
            if (
                v == MORE_INFORMATIVE
                and cs_savvy(eq.g, n) > ref_css
                and cs_inexperienced(eq) > ref_csi
            ):
                best = s
            else:
                break  # require the whole prefix below best to qualify
        s_tilde_est = best

    above = [row for row in rows if row["s"] > s_bar + 1e-12]
    below = [row for row in rows if row["s"] < s_lower_est - 1e-12]
    flags = {
        "above_bar_more_informative": all(
            row["verdict_vs_prev"] == MORE_INFORMATIVE for row in above[1:]
        ),
        "above_bar_cs_savvy_increasing": all(
            b["cs_savvy"] > a["cs_savvy"] for a, b in zip(above, above[1:])
        ),
        "above_bar_cs_inexperienced_decreasing": all(
            b["cs_inexperienced"] < a["cs_inexperienced"] for a, b in zip(above, above[1:])
        ),
        "below_lower_never_more_informative": all(
            row["verdict_vs_prev"] != MORE_INFORMATIVE for row in below[1:]
        ),
    }
    resolution = max(b - a for a, b in zip(s_grid, s_grid[1:]))
    return ThresholdReport(
        s_bar=s_bar,
        s_lower_est=s_lower_est,
        s_tilde_est=s_tilde_est,
        grid_resolution=resolution,
        flags=flags,
        rows=tuple(rows),
    )


SWEEP_COLUMNS = (
    "r_star",
    "v_L_star",
    "v_H_star",
    "v_T_star",
    "beta_star",
    "cs_savvy",
    "cs_inexperienced",
    "p_multi_visit",
    "verdict_vs_prev",
)


def scan_csv_text(
    rows: Iterable[dict[str, Any]], axis_column: str, header_comments: Sequence[str] = ()
) -> str:
    """Render scan rows as CSV with provenance comment lines up top."""
    import io

    buf = io.StringIO()
    for comment in header_comments:
        buf.write(f"# {comment}\n")
    fieldnames = [axis_column, *SWEEP_COLUMNS, "error"]
    writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fieldnames})
    return buf.getvalue()


def write_scan_csv(
    rows: Iterable[dict[str, Any]], path, axis_column: str, header_comments: Sequence[str] = ()
) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(scan_csv_text(rows, axis_column, header_comments))
