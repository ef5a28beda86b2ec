import json
import math

import numpy as np
import pytest

from nsp_shock import cli
from nsp_shock.config import ConfigError, apply_overrides, from_dict, load_config, with_override

# a short, cheap evolution used by the end-to-end CLI tests
SMALL_RUN = [
    "physical.T=1.0",
    "grid.nodes=2001",
    "grid.dy=1.0",
    "grid.L_left=400",
    "grid.L_right=400",
    "evolve.t_end=4",
    "evolve.sample_every=1",
    "evolve.snapshot_every=4",
]


# config


def test_config_needs_a_parameter_block():
    with pytest.raises(ConfigError):
        from_dict({})
    with pytest.raises(ConfigError):
        from_dict({"scaled": {"epsilon": 0.02}})


def test_config_consistency_check():
    eps = 0.04
    ok = {"physical": {"T": 0.0, "mu": eps * 2.0, "lam": math.sqrt(eps) * 0.5},
          "scaled": {"epsilon": eps, "mu_bar": 2.0, "lambda_bar": 0.5}}
    cfg = from_dict(ok)
    assert cfg.plasma().mu == pytest.approx(0.08)
    bad = {"physical": {"T": 0.0, "mu": 1.0, "lam": 1.0}, "scaled": {"epsilon": eps}}
    with pytest.raises(ConfigError, match="inconsistent"):
        from_dict(bad)


def test_scaled_block_alone():
    cfg = from_dict({"scaled": {"epsilon": 0.04, "mu_bar": 1.0, "lambda_bar": 1.0, "T": 0.0}})
    p = cfg.plasma()
    assert p.mu == pytest.approx(0.04) and p.lam == pytest.approx(0.2)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        from_dict({"physical": {"T": 1.0, "gamma": 2.0}})
    with pytest.raises(ConfigError):
        from_dict({"physical": {"T": 1.0}, "plot": {}})


def test_overrides_and_defaults(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('[physical]\nT = 1.0\n[evolve]\nE0 = 2e-3\n')
    cfg = load_config(path, ["evolve.t_end=100", "evolve.doubling=false"])
    assert cfg.evolve.E0 == 2e-3
    assert cfg.evolve.t_end == 100.0
    assert cfg.evolve.doubling is False
    assert cfg.grid.dy == 1.0 and cfg.evolve.jump == 0.05
    assert with_override(cfg, "evolve.E0", "5e-3").evolve.E0 == 5e-3
    with pytest.raises(ConfigError):
        apply_overrides({}, ["noequals"])
    with pytest.raises(ConfigError):
        load_config(None, ["physical.T=1", "evolve.doubling=maybe"])


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[physical\nT = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_flat_view():
    flat = load_config(None, ["physical.T=1"]).flat()
    assert flat["physical.T"] == 1.0 and "scaled.epsilon" not in flat


# cli


def test_rh_reference(capsys):
    assert cli.main(["rh", "--T", "0", "--eps", "0.1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["s"] == pytest.approx(0.9, abs=1e-15)
    assert out["n_plus"] == pytest.approx(0.81, abs=1e-15)
    assert max(map(abs, out["residual_eulerian"])) < 1e-12


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["rh", "--T", "0", "--eps", "0.1", "--bogus"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_invalid_input_exits_2_with_json(capsys):
    assert cli.main(["rh", "--T", "-1", "--eps", "0.1"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit"] == 2 and err["error"]


def test_solver_failure_exits_1(capsys, tmp_path):
    # too short a domain for the requested amplitude
    code = cli.main(["profile", "--T", "0", "--eps", "0.02", "--L", "3", "--nodes", "201", "--out", str(tmp_path)])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["exit"] == 1


def test_kdvb_writes_csv_with_header(tmp_path, capsys):
    assert cli.main(["kdvb", "--T", "0", "--delta", "0.01", "--out", str(tmp_path)]) == 0
    cols, header = cli.read_csv(tmp_path / "n1.csv")
    assert header["command"] == "kdvb" and float(header["delta"]) == 0.01
    assert cols["n1"][-1] == pytest.approx(-2.0, abs=1e-6)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["monotone"]


def test_validate_report(tmp_path, capsys):
    args = ["validate", "--eps-list", "0.04", "0.02", "--nodes", "2001", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["orders"]["err_n"]) == 1
    assert 1.5 < report["orders"]["err_n"][0] < 2.5


def test_output_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    assert cli.main(["kdvb", "--T", "0", "--delta", "0"]) == 0
    assert (tmp_path / "kdvb" / "n1.csv").exists()


def _evolve(out):
    args = ["evolve", "--out", str(out)]
    for item in SMALL_RUN:
        args += ["--set", item]
    return cli.main(args)


def test_evolve_is_deterministic_and_diagnose_round_trips(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _evolve(a) == 0 and _evolve(b) == 0
    capsys.readouterr()
    names = sorted(p.name for p in a.iterdir())
    assert "diagnostics.csv" in names and "verdict.json" in names and "profile.csv" in names
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    verdict = json.loads((a / "verdict.json").read_text())
    assert verdict["config"]["physical"]["T"] == 1.0
    assert verdict["max_mass"] < 1e-10

    snaps = sorted(a.glob("snapshot_*.csv"))
    last = snaps[-1]
    assert cli.main(["diagnose", "--state", str(last), "--profile", str(a / "profile.csv")]) == 0
    rep = json.loads(capsys.readouterr().out)
    diag, _ = cli.read_csv(a / "diagnostics.csv")
    i = int(np.argmin(np.abs(diag["t"] - rep["t"])))
    assert rep["E"] == pytest.approx(diag["E"][i], rel=1e-10)
    assert rep["mass_v"] == pytest.approx(diag["mass_v"][i], abs=1e-13)


def test_diagnose_grid_mismatch(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    cli.write_csv(a, {"y": np.arange(3.0), "v": np.ones(3), "u": np.zeros(3), "phi": np.zeros(3)}, {"t": 0})
    cli.write_csv(b, {"y": np.arange(4.0), "v": np.ones(4), "u": np.zeros(4), "phi": np.zeros(4)}, {"s": 1})
    assert cli.main(["diagnose", "--state", str(a), "--profile", str(b)]) == 2


def test_sweep_summary(tmp_path, capsys):
    args = ["sweep", "--param", "evolve.E0", "--values", "1e-4", "2e-4", "--out", str(tmp_path)]
    for item in SMALL_RUN:
        args += ["--set", item]
    assert cli.main(args) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["results"]) == 2
    assert all("checks" in r for r in summary["results"])


def test_csv_round_trip(tmp_path):
    cols = {"x": np.linspace(0, 1, 7), "f": np.exp(np.linspace(0, 1, 7))}
    cli.write_csv(tmp_path / "f.csv", cols, {"k": "v"})
    back, header = cli.read_csv(tmp_path / "f.csv")
    assert header == {"k": "v"}
    for k in cols:
        assert np.array_equal(back[k], cols[k])
