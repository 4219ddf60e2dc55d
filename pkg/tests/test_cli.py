import json

import numpy as np
import pytest

from frictionlab import cli, io

SMALL_SIM = {"potential": {"kappa": 0.3}, "P0": [0.0, 0.0, 0.01],
             "grid": {"h": 0.05, "t_max": 4.0}, "modes": {"n_radial": 32, "angular": ["lebedev", 7]},
             "record_every": 5}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_omega_command(tmp_path):
    out = tmp_path / "omega"
    assert cli.main(["omega", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["scalars"]["delta_star"] > 0
    assert man["files"]["omega.csv"] == io.sha256(out / "omega.csv")
    data = io.read_csv(out / "omega.csv")
    assert np.allclose(data["omega"], data["omega1"] + data["omega2"], atol=1e-12)


def test_negative_mass_names_field(tmp_path, capsys):
    bad = write(tmp_path, {"potential": {"mass": -1.0}})
    assert cli.main(["simulate", "-c", bad, "--out", str(tmp_path / "x")]) == 2
    assert "M0" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, field", [
    ({"grid": {"h": -0.1}}, "grid.h"),
    ({"potential": {"family": "lorentzian"}}, "potential"),
    ({"X0": [0, 1]}, "X0"),
    ({"schema": 99}, "schema"),
])
def test_invalid_configs(cfg, field):
    with pytest.raises(cli.ConfigError) as exc:
        cli.validate_config(cfg)
    assert field in str(exc.value)


def test_overrides():
    cfg = cli.validate_config({}, h=0.02, t_max=3.0)
    assert cfg.h == 0.02 and cfg.t_max == 3.0 and cfg.n_steps == 150


def test_empty_sweep():
    with pytest.raises(cli.ConfigError, match="empty sweep"):
        cli.parse_axis("potential.kappa=")
    with pytest.raises(cli.ConfigError, match="empty sweep"):
        cli.sweep_configs({}, [])


def test_parse_axis_lists():
    assert cli.parse_axis("P0=[0,0,0.1];[0,0,0.2]") == ("P0", [[0, 0, 0.1], [0, 0, 0.2]])
    assert cli.parse_axis("potential.kappa=0.05,0.1") == ("potential.kappa", [0.05, 0.1])


def test_simulate_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL_SIM)
    for d in ("a", "b"):
        assert cli.main(["simulate", "-c", cfg, "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["config_hash"] == json.loads((tmp_path / "b" / "manifest.json").read_text())["config_hash"]
    assert man["scalars"]["energy_drift"] < 1e-4


def test_fit_subcommand(tmp_path):
    t = np.linspace(1, 100, 400)
    io.write_csv(tmp_path / "d.csv", ["t", "P_abs"], [t, 2 * t ** -0.75])
    assert cli.main(["fit", str(tmp_path / "d.csv")]) == 0
    fit = json.loads((tmp_path / "fit.json").read_text())["fit"]
    assert fit["exponent"] == pytest.approx(-0.75, abs=1e-10)
    assert fit["delta_fit"] == pytest.approx(0.25, abs=1e-10)
    assert cli.main(["fit", str(tmp_path / "d.csv"), "--column", "nope"]) == 2


def test_sweep_rows_and_failures(tmp_path):
    cfg = write(tmp_path, SMALL_SIM)
    code = cli.main(["sweep", "-c", cfg, "--out", str(tmp_path / "s"),
                     "--axis", "potential.kappa=0.1,0.2,-1"])
    assert code == 0    # one failing row does not abort the sweep
    rows = io.read_csv(tmp_path / "s" / "sweep.csv")
    assert list(rows["potential.kappa"]) == [0.1, 0.2, -1.0]
    assert rows["status"][:2] == ["ok", "ok"] and rows["status"][2] != "ok"
    assert (tmp_path / "s" / "run_000" / "manifest.json").exists()
    assert cli.main(["sweep", "-c", cfg, "--out", str(tmp_path / "t"),
                     "--axis", "potential.mass=-1,-2"]) == 1


def test_sweep_parallel_matches_serial(tmp_path):
    axes = [cli.parse_axis("potential.kappa=0.1,0.2")]
    cli.run_sweep("simulate", SMALL_SIM, axes, tmp_path / "p", workers=2)
    cli.run_sweep("simulate", SMALL_SIM, axes, tmp_path / "q", workers=1)
    assert (tmp_path / "p" / "sweep.csv").read_bytes() == (tmp_path / "q" / "sweep.csv").read_bytes()


def test_drag_command(tmp_path):
    cfg = write(tmp_path, {"drag": {"speeds": [0.05, 0.1], "forces": [1e-3]}})
    assert cli.main(["drag", "-c", cfg, "--out", str(tmp_path / "d")]) == 0
    tv = io.read_csv(tmp_path / "d" / "terminal_velocity.csv")
    assert tv["v_terminal"][0] == pytest.approx(0.003559, rel=1e-3)


def test_workers_env(monkeypatch):
    monkeypatch.setenv("FRICTIONLAB_WORKERS", "3")
    assert cli._workers(None) == 3
    assert cli._workers(2) == 2
    monkeypatch.setenv("FRICTIONLAB_WORKERS", "many")
    with pytest.raises(cli.ConfigError):
        cli._workers(None)
