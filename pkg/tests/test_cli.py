import csv
import json

import pytest

from wmmse_isac import oracles
from wmmse_isac.channel import sample_scenario
from wmmse_isac.cli import main
from wmmse_isac.config import ScenarioConfig
from wmmse_isac.exceptions import ConfigError
from wmmse_isac.files import CSV_COLUMNS, load_config, parse_override


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    cfg, spec = load_config(str(path))
    assert cfg == ScenarioConfig()
    assert spec.n_trials == 500 and spec.omega_values == (0.0, 0.25, 0.5, 0.75, 0.99)


def test_override_weight_sense():
    cfg, _ = load_config(None, ["weight_sense=0.5"])
    assert cfg.comm_weights == pytest.approx((0.5 / 3,) * 3)


def test_dbm_and_snr_keys(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("scenario:\n  noise_power_comm_dbm: 20\n  snr_db: 10\nsweep:\n  n_trials: 7\n")
    cfg, spec = load_config(str(path), ["sweep.omega_values=[0.1, 0.2]"])
    assert cfg.noise_power_comm == pytest.approx(100.0)
    assert cfg.power_budget == pytest.approx(10.0)
    assert spec.n_trials == 7 and spec.omega_values == (0.1, 0.2)


def test_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_users": 2, "omega_values": [0.3]}))
    cfg, spec = load_config(str(path))
    assert cfg.n_users == 2 and spec.omega_values == (0.3,)


@pytest.mark.parametrize("overrides, key", [
    (["weight_sense=1.0"], "weight_sense"),
    (["power_budget=0"], "power_budget"),
    (["bogus=1"], "bogus"),
    (["n_tx=four"], "n_tx"),
])
def test_bad_config_names_key(overrides, key):
    with pytest.raises(ConfigError) as err:
        load_config(None, overrides)
    assert key in str(err.value)


def test_exponent_strings_are_numbers(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("tol: 1e-6\n")
    cfg, _ = load_config(str(path), ["power_budget=2E+2"])
    assert cfg.tol == 1e-6 and cfg.power_budget == 200.0


def test_parse_override_errors():
    with pytest.raises(ConfigError):
        parse_override("no_equals_sign")
    assert parse_override("a=[1, 2]") == ("a", [1, 2])


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/cfg.yaml")


@pytest.mark.parametrize("argv", [
    ["solve", "--set", "weight_sense=1.0"],
    ["solve", "--set", "power_budget=0"],
    ["sweep", "omega", "--set", "n_paths=-1"],
])
def test_config_errors_exit_1(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_solve_seed7(tmp_path, capsys):
    assert main(["solve", "--seed", "7", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("converged=True")
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["converged"] and report["iterations"] <= 50
    rows = list(csv.DictReader((tmp_path / "trace.csv").open()))
    assert len(rows) == report["iterations"] + 1
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["scenario"]["seed"] == 7 and manifest["command"] == "solve"


def test_solve_single_user_waterfilling(tmp_path):
    sets = ["n_users=1", "n_clutters=0", "weight_sense=0", "tol=1e-9", "max_iters=3000"]
    argv = ["solve", "--out", str(tmp_path)]
    for s in sets:
        argv += ["--set", s]
    assert main(argv) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    cfg = ScenarioConfig(n_users=1, n_clutters=0, weight_sense=0.0)
    H = sample_scenario(cfg, 0).comm[0]
    cap = oracles.waterfill_capacity(H, cfg.noise_power_comm, cfg.power_budget)
    assert abs(report["comm_rates"][0] - cap) < 1e-3


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WMMSE_ISAC_OUT", str(tmp_path / "envout"))
    assert main(["solve", "--set", "max_iters=2"]) == 0
    assert (tmp_path / "envout" / "trace.csv").is_file()


SMALL = ["--set", "n_tx=8", "--set", "n_users=2", "--set", "n_ue_ant=2",
         "--set", "sweep.omega_values=[0.0, 0.5]", "--set", "sweep.snr_values_db=[20]"]


def test_sweep_smoke_and_schema(tmp_path):
    assert main(["sweep", "omega", "--trials", "2", "--workers", "1", "--out", str(tmp_path)] + SMALL) == 0
    with (tmp_path / "sweep_omega.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0][:11] == ["sweep_param", "value", "mean_cmi_per_ue", "se_cmi", "mean_smi",
                            "se_smi", "mean_sc_rate", "se_sc_rate", "n_trials", "n_failed",
                            "mean_iters"]
    assert len(rows) == 3 and rows[1][8] == "2"
    lines = (tmp_path / "trials_omega.jsonl").read_text().splitlines()
    assert len(lines) == 4
    rec = json.loads(lines[0])
    assert rec["failed"] is False and rec["error"] is None and len(rec["comm_rates"]) == 2
    manifest = json.loads((tmp_path / "manifest_omega.json").read_text())
    assert manifest["sweep"]["n_trials"] == 2 and manifest["csv_schema_version"] == 1


def test_sweep_rerun_byte_identical(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["sweep", "snr", "--trials", "3", "--workers", "1", "--out", str(a)] + SMALL) == 0
    assert main(["sweep", "snr", "--trials", "3", "--workers", "2", "--out", str(b)] + SMALL) == 0
    assert main(["sweep", "snr", "--manifest", str(a / "manifest_snr.json"),
                 "--workers", "3", "--out", str(c)]) == 0
    ref = (a / "sweep_snr.csv").read_bytes()
    assert (b / "sweep_snr.csv").read_bytes() == ref
    assert (c / "sweep_snr.csv").read_bytes() == ref


def test_sweep_all_failed_exit_3(tmp_path, monkeypatch):
    from wmmse_isac import montecarlo
    from wmmse_isac.exceptions import SolverError

    def broken(cfg, idx):
        raise SolverError("no bracket")

    monkeypatch.setattr(montecarlo, "run_trial", broken)
    assert main(["sweep", "omega", "--trials", "1", "--workers", "1", "--out", str(tmp_path)] + SMALL) == 3


def test_check_command(capsys):
    assert main(["check", "--instances", "2"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8
