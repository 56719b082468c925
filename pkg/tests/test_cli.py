import json

import pytest

from disclose_eq.cli import main


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


BASE = {"prior": {"family": "uniform"}, "n": 2, "alpha": 0.65, "s": 0.1}


def test_solve_emits_equilibrium(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", BASE)
    out = tmp_path / "out.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["equilibrium"]["r_star"] == pytest.approx(0.4897479614377023)
    assert payload["provenance"]["version"]
    assert len(payload["provenance"]["config_sha256"]) == 64
    assert payload["equilibrium"]["G"]["segments"]


def test_solve_round_trips_through_verify_and_simulate(tmp_path):
    cfg = _write(tmp_path, "cfg.json", BASE)
    solve_out = tmp_path / "solve.json"
    assert main(["solve", "--config", cfg, "--out", str(solve_out)]) == 0
    verify_out = tmp_path / "verify.json"
    assert (
        main(["verify", "--config", str(solve_out), "--out", str(verify_out)]) == 0
    )
    solved = json.loads(solve_out.read_text())["equilibrium"]
    verified = json.loads(verify_out.read_text())["equilibrium"]
    for key in ("r_star", "v_L_star", "v_H_star", "v_T_star", "beta_star", "eta"):
        assert solved[key] == verified[key]  # identical, not just close
    sim_out = tmp_path / "sim.json"
    assert (
        main(["simulate", "--config", str(solve_out), "--seed", "3", "--out", str(sim_out)])
        == 0
    )
    simulated = json.loads(sim_out.read_text())["equilibrium"]
    for key in ("r_star", "v_L_star", "beta_star"):
        assert solved[key] == simulated[key]


def test_verify_oracle_and_perturbation(tmp_path):
    cfg = _write(tmp_path, "cfg.json", BASE)
    out = tmp_path / "v.json"
    assert main(["verify", "--config", cfg, "--oracle-grid", "201", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["certificate"]["pass"]
    assert payload["oracle"]["gap"] <= payload["oracle_bound"]
    # perturbed candidate: certificate failure, exit 4
    assert main(["verify", "--config", cfg, "--perturb", "v_L", "0.05"]) == 4


def test_exit_codes(tmp_path, capsys):
    missing = _write(tmp_path, "bad.json", {"prior": {"family": "uniform"}})
    assert main(["solve", "--config", missing]) == 1
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    assert main(["solve", "--config", str(garbled)]) == 1
    boundary = _write(tmp_path, "alpha1.json", {**BASE, "alpha": 1.0})
    assert main(["solve", "--config", boundary]) == 3
    cfg = _write(tmp_path, "cfg.json", BASE)
    # perturbing the reserve above the feasibility frontier: invariant failure
    assert main(["verify", "--config", cfg, "--perturb", "r", "0.4"]) == 2
    capsys.readouterr()


def test_alpha_zero_note(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {**BASE, "alpha": 0.0})
    out = tmp_path / "out.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert "full disclosure" in payload["note"]


def test_sweep_csv(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "sweep.json",
        {
            "prior": {"family": "uniform"},
            "alpha": 0.5,
            "s": 0.1,
            "axis": "n",
            "grid": [2, 3, 19, 20],
        },
    )
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].startswith("# version=")
    header = lines[2].split(",")
    assert header[0] == "n"
    assert "verdict_vs_prev" in header
    assert len(lines) == 3 + 4
    # the multi-visit column drops to zero at the concealment threshold
    rows = [dict(zip(header, line.split(","))) for line in lines[3:]]
    assert float(rows[0]["p_multi_visit"]) > 0
    assert float(rows[2]["p_multi_visit"]) == 0.0


def test_sweep_carries_errors_per_point(tmp_path):
    cfg = _write(
        tmp_path,
        "sweep.json",
        {
            "prior": {"family": "uniform"},
            "n": 2,
            "alpha": 0.5,
            "axis": "s",
            "grid": [0.1, 0.7, 0.2],  # middle point is outside (0, mean)
        },
    )
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    rows = lines[3:]
    assert len(rows) == 3
    assert "search cost" in rows[1]


def test_simulate_requires_seed_and_writes_curve(tmp_path):
    cfg = _write(tmp_path, "sim.json", {**BASE, "consumers": 20000, "bins": 20})
    assert main(["simulate", "--config", cfg]) == 1  # --seed is mandatory
    out = tmp_path / "sim.json.out"
    curve = tmp_path / "curve.csv"
    code = main(
        [
            "simulate",
            "--config",
            cfg,
            "--seed",
            "99",
            "--out",
            str(out),
            "--curve-out",
            str(curve),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["report"]["consumers"] == 20000
    assert max(abs(z) for z in payload["z_scores"].values()) <= 5.0
    lines = curve.read_text().strip().splitlines()
    assert lines[2].split(",") == ["bin_left", "bin_right", "v_mid", "u_hat", "se", "u_analytic"]


def test_simulate_statistical_failure_exit(tmp_path, monkeypatch):
    # force an impossible z-score to confirm the hard-failure exit path
    import disclose_eq.cli as cli

    monkeypatch.setattr(cli, "_z_scores", lambda eq, report: {"eta": 12.0})
    cfg = _write(tmp_path, "sim.json", {**BASE, "consumers": 2000, "bins": 20})
    assert main(["simulate", "--config", cfg, "--seed", "1"]) == 5


def test_limit_command(tmp_path):
    cfg = _write(
        tmp_path, "lim.json", {"prior": {"family": "uniform"}, "alpha": 0.5, "s": 0.1}
    )
    out = tmp_path / "lim.out"
    assert main(["limit", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["n_lower_bar"] == 19
    seq = payload["v_H_sequence"]
    assert [n for n, _ in seq] == [19 * 2**k for k in range(7)]
    vs = [v for _, v in seq]
    assert all(b < a for a, b in zip(vs, vs[1:]))
    assert payload["limit"]["v_H_inf"] == pytest.approx(0.8, abs=1e-9)
    assert payload["limit"]["atom_mass"] == pytest.approx(0.8, abs=1e-9)


def test_hetero_command(tmp_path):
    cfg = _write(
        tmp_path,
        "het.json",
        {
            "prior": {"family": "uniform"},
            "alpha": 0.5,
            "cost_model": {"type": "discrete", "points": [[0.1, 0.5], [0.2, 0.5]]},
        },
    )
    out = tmp_path / "het.out"
    assert main(["hetero", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["first_holding_n"] == 32
    assert payload["first_holding_report"]["holds"]
    assert payload["first_holding_report"]["b_star"] == pytest.approx(2.5)
    bad = _write(
        tmp_path,
        "bad.json",
        {
            "prior": {"family": "uniform"},
            "alpha": 0.5,
            "cost_model": {"type": "discrete", "points": [[-0.1, 1.0]]},
        },
    )
    assert main(["hetero", "--config", bad]) == 1
