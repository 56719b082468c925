"""Command-line front end.

Subcommands: solve | sweep | verify | simulate | limit | hetero.
JSON goes to stdout (or --out); sweeps emit CSV.  Exit codes:

  0 success          3 unsupported boundary (alpha = 1)
  1 malformed config 4 certificate failure
  2 invariant failed 5 statistical failure (simulation z-score > 5)

Every structured output carries the sha256 of the canonical config and
the package version.  Floats serialize via repr, which round-trips
exactly.  DISCLOSE_EQ_THREADS caps simulation parallelism.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Any

import numpy as np

from . import __version__
from .endogenous import (
    Equilibrium,
    assemble_market,
    limit_equilibrium,
    n_lower_bar,
    solve_endog,
    v_h_large_n,
)
from .errors import (
    ConfigError,
    DiscloseEqError,
    DomainError,
    InfeasibleCandidateError,
    NoInteriorRootError,
    UnsupportedBoundaryError,
    ValidationFailureError,
)
from .montecarlo import (
    HeterogeneousCosts,
    SimConfig,
    SingleCost,
    simulate_market,
)
from .priors import Prior, prior_from_json
from .verify import (
    check_dm_conditions,
    cost_distribution_from_json,
    hetero_check,
    hetero_first_holding_n,
    oracle_gap,
    payoff_identity_gap,
)
from .welfare import cs_inexperienced, cs_savvy, equilibrium_row, scan_csv_text

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_BOUNDARY = 3
EXIT_CERTIFICATE = 4
EXIT_STATISTICAL = 5

# calibrated oracle-gap coefficient: bound = coeff / m
ORACLE_GAP_COEFF = 0.2


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in cfg and "equilibrium" in cfg:
        cfg = cfg["config"]  # a previous solve output was passed back in
        if not isinstance(cfg, dict):
            raise ConfigError("embedded config must be a JSON object")
    return cfg


def _config_hash(cfg: dict[str, Any]) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _provenance(cfg: dict[str, Any]) -> dict[str, str]:
    return {"config_sha256": _config_hash(cfg), "version": __version__}


def _require(cfg: dict[str, Any], key: str):
    if key not in cfg:
        raise ConfigError(f"config is missing required key {key!r}")
    return cfg[key]


def _market_params(cfg: dict[str, Any]) -> tuple[Prior, int, float, float]:
    prior = prior_from_json(_require(cfg, "prior"))
    n = _require(cfg, "n")
    if not isinstance(n, int) or n < 2:
        raise ConfigError("n must be an integer >= 2")
    alpha = float(_require(cfg, "alpha"))
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")
    s = float(_require(cfg, "s"))
    mu = prior.mean()
    if not 0.0 < s < mu:
        raise ConfigError(f"s must lie in (0, mu) = (0, {mu})")
    return prior, n, alpha, s


def _emit(payload: dict[str, Any], out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _summarize(eq: Equilibrium) -> str:
    return (
        f"r* = {eq.r_star:.6f}  v_L* = {eq.v_l_star:.6f}  v_H* = {eq.v_h_star:.6f}  "
        f"v_T* = {eq.v_t_star:.6f}  bottom_disclosure = {eq.bottom_disclosure}"
    )


def cmd_solve(cfg: dict[str, Any], args) -> int:
    prior, n, alpha, s = _market_params(cfg)
    eq = solve_endog(prior, n, alpha, s)
    payload = {
        "command": "solve",
        "provenance": _provenance(cfg),
        "config": cfg,
        "equilibrium": eq.to_json_dict(),
    }
    if alpha == 0.0:
        payload["note"] = "alpha = 0: the unique equilibrium is full disclosure"
    _emit(payload, args.out)
    print(_summarize(eq), file=sys.stderr)
    return EXIT_OK


def cmd_sweep(cfg: dict[str, Any], args) -> int:
    prior = prior_from_json(_require(cfg, "prior"))
    axis = _require(cfg, "axis")
    grid = _require(cfg, "grid")
    if axis not in ("n", "s", "alpha"):
        raise ConfigError("axis must be one of n | s | alpha")
    if not isinstance(grid, list) or len(grid) < 2:
        raise ConfigError("grid must be a list with at least two points")
    base = {k: cfg.get(k) for k in ("n", "alpha", "s")}
    rows = []
    prev = None
    for value in grid:
        row: dict[str, Any] = {axis: value}
        params = dict(base)
        params[axis] = value
        try:
            eq = solve_endog(prior, int(params["n"]), float(params["alpha"]), float(params["s"]))
            row.update(equilibrium_row(eq, prev))
            row["error"] = ""
            prev = eq
        except DiscloseEqError as exc:
            row["error"] = str(exc)
            prev = None
        rows.append(row)
    comments = [
        f"config_sha256={_config_hash(cfg)}",
        f"version={__version__}",
    ]
    text = scan_csv_text(rows, axis_column=axis, header_comments=comments)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(cfg: dict[str, Any], args) -> int:
    prior, n, alpha, s = _market_params(cfg)
    eq = solve_endog(prior, n, alpha, s)
    if args.perturb:
        field, delta = args.perturb[0], float(args.perturb[1])
        if field == "v_L":
            eq = assemble_market(prior, n, alpha, eq.v_l_star + delta, eq.r_star, s)
        elif field == "r":
            eq = assemble_market(prior, n, alpha, eq.v_l_star, eq.r_star + delta, s)
        else:
            raise ConfigError(f"--perturb supports fields v_L and r, not {field!r}")
    report = check_dm_conditions(eq, grid_size=args.grid_size)
    payload = {
        "command": "verify",
        "provenance": _provenance(cfg),
        "equilibrium": eq.to_json_dict(),
        "certificate": report.to_json_dict(),
        "payoff_identity_gap": payoff_identity_gap(eq),
    }
    ok = report.passed
    if args.oracle_grid:
        gap = oracle_gap(eq, args.oracle_grid)
        payload["oracle"] = gap
        # discretization bound calibrated on the measured gap decay
        # (equilibrium gaps stay ~30x below it, perturbations ~500x above)
        bound = ORACLE_GAP_COEFF / gap["m"]
        payload["oracle_bound"] = bound
        ok = ok and gap["gap"] <= bound
    _emit(payload, args.out)
    return EXIT_OK if ok else EXIT_CERTIFICATE


def cmd_simulate(cfg: dict[str, Any], args) -> int:
    prior, n, alpha, s = _market_params(cfg)
    if args.seed is None:
        raise ConfigError("simulate requires --seed (no wall-clock default)")
    eq = solve_endog(prior, n, alpha, s)
    cost_spec = cfg.get("cost_model")
    if cost_spec is None:
        cost_model = SingleCost(s)
    elif isinstance(cost_spec, dict) and cost_spec.get("type") == "single":
        cost_model = SingleCost(float(cost_spec["s"]))
    else:
        cost_model = HeterogeneousCosts(cost_distribution_from_json(cost_spec))
    config = SimConfig(
        consumers=int(cfg.get("consumers", 100_000)),
        seed=args.seed,
        cost_model=cost_model,
        bins=int(cfg.get("bins", 50)),
    )
    report = simulate_market(eq, config)
    z_scores = _z_scores(eq, report)
    payload = {
        "command": "simulate",
        "provenance": _provenance(cfg),
        "equilibrium": eq.to_json_dict(),
        "report": report.to_json_dict(),
        "z_scores": z_scores,
    }
    _emit(payload, args.out)
    if args.curve_out:
        _write_curve_csv(eq, report, args.curve_out, _provenance(cfg))
    worst = max((abs(z) for z in z_scores.values() if not np.isnan(z)), default=0.0)
    return EXIT_OK if worst <= 5.0 else EXIT_STATISTICAL


def _z_scores(eq: Equilibrium, report) -> dict[str, float]:
    from .verify import payoff_u

    out: dict[str, float] = {}
    if report.eta_se and not np.isnan(report.eta_se) and report.eta_se > 0:
        out["eta"] = (report.eta_hat - eq.eta) / report.eta_se
    if report.cs_savvy_se and report.cs_savvy_se > 0:
        out["cs_savvy"] = (report.cs_savvy_hat - cs_savvy(eq.g, eq.n)) / report.cs_savvy_se
    if report.cs_inexperienced_se and report.cs_inexperienced_se > 0:
        out["cs_inexperienced"] = (
            report.cs_inexperienced_hat - cs_inexperienced(eq)
        ) / report.cs_inexperienced_se
    share_se = np.sqrt((1.0 / eq.n) * (1.0 - 1.0 / eq.n) / report.consumers)
    worst_share = max(abs(sh - 1.0 / eq.n) for sh in report.firm_sale_shares)
    out["firm_share"] = float(worst_share / share_se)
    worst_curve = 0.0
    for b in report.curve:
        if b.visits >= 1000 and b.se > 0:
            z = (b.u_hat - float(payoff_u(eq, b.v_mid))) / b.se
            worst_curve = max(worst_curve, abs(z))
    out["curve_max"] = worst_curve
    return out


def _write_curve_csv(eq, report, path: str, prov: dict[str, str]) -> None:
    from .verify import payoff_u

    with open(path, "w") as fh:
        fh.write(f"# config_sha256={prov['config_sha256']}\n")
        fh.write(f"# version={prov['version']}\n")
        fh.write("bin_left,bin_right,v_mid,u_hat,se,u_analytic\n")
        for b in report.curve:
            ua = float(payoff_u(eq, b.v_mid))
            fh.write(f"{b.bin_left!r},{b.bin_right!r},{b.v_mid!r},{b.u_hat!r},{b.se!r},{ua!r}\n")


def cmd_limit(cfg: dict[str, Any], args) -> int:
    prior = prior_from_json(_require(cfg, "prior"))
    alpha = float(_require(cfg, "alpha"))
    s = float(_require(cfg, "s"))
    if not 0.0 < alpha < 1.0:
        raise ConfigError("limit analysis needs alpha in (0, 1)")
    nbar = n_lower_bar(prior, alpha, s)
    seq = []
    n = nbar
    for _ in range(int(cfg.get("doublings", 6)) + 1):
        try:
            seq.append([n, v_h_large_n(prior, n, s)])
        except NoInteriorRootError:
            seq.append([n, 1.0])
        n *= 2
    lim = limit_equilibrium(prior, alpha, s)
    payload = {
        "command": "limit",
        "provenance": _provenance(cfg),
        "n_lower_bar": nbar,
        "v_H_sequence": seq,
        "limit": {
            "v_H_inf": lim.v_h_inf,
            "atom_mass": lim.atom_mass,
            "atom_location": prior.mean() - s,
            "G_inf": lim.g_inf.to_json_dict(),
        },
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_hetero(cfg: dict[str, Any], args) -> int:
    prior = prior_from_json(_require(cfg, "prior"))
    alpha = float(_require(cfg, "alpha"))
    costs = cost_distribution_from_json(_require(cfg, "cost_model"))
    if not 0.0 < alpha < 1.0:
        raise ConfigError("hetero analysis needs alpha in (0, 1)")
    payload: dict[str, Any] = {
        "command": "hetero",
        "provenance": _provenance(cfg),
    }
    if "n" in cfg:
        report = hetero_check(prior, int(cfg["n"]), alpha, costs)
        payload["report"] = report.to_json_dict()
    first_n, first_report = hetero_first_holding_n(prior, alpha, costs)
    payload["first_holding_n"] = first_n
    payload["first_holding_report"] = first_report.to_json_dict()
    _emit(payload, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disclose-eq",
        description="Disclosure equilibria in consumer-search markets",
    )
    parser.add_argument("command", choices=["solve", "sweep", "verify", "simulate", "limit", "hetero"])
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--grid-size", type=int, default=1001)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--oracle-grid", type=int, default=None)
    parser.add_argument("--perturb", nargs=2, metavar=("FIELD", "DELTA"), default=None)
    parser.add_argument("--curve-out", default=None, help="CSV path for the sale curve")
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "hetero": cmd_hetero,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedBoundaryError as exc:
        print(f"unsupported boundary: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except (ValidationFailureError, InfeasibleCandidateError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DomainError, DiscloseEqError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
