import csv
import json
import math

import pytest

from qrepsim import cli
from qrepsim.analytic_oracle import f_e2e, f_ssdp_e2e
from qrepsim.config import SEED_ENV, load_config, parse_config_text
from qrepsim.strategies import ConfigError, StrategyConfig, run_strategy


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


# --- configuration -------------------------------------------------------------

def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    s = load_config(path)
    assert s.topology.total_km == 100.0 and s.topology.c_fiber == 300_000.0
    assert s.channel.p_depo == 0.025 and s.channel.tau == 0.01 and s.channel.loss_db_per_km == 0.3
    assert s.channel.lambda_gate == 0.0 and s.channel.p_meas == 0.0


def test_zero_lifetime_is_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("tau = 0\n")
    with pytest.raises(ConfigError, match="tau"):
        load_config(path)


@pytest.mark.parametrize("word", ["disabled", "Disabled", "inf", "none"])
def test_disabled_memory_keyword(word, tmp_path):
    path = tmp_path / "mem.cfg"
    path.write_text(f"tau = {word}  # no memory errors\n")
    assert math.isinf(load_config(path).channel.tau)


def test_json_and_key_value_formats_agree(tmp_path):
    kv = tmp_path / "a.cfg"
    kv.write_text("p_depo = 0.05\nmemory_qubits: 40\nseed=3\n")
    js = tmp_path / "a.json"
    js.write_text(json.dumps({"p_depo": 0.05, "memory_qubits": 40, "seed": 3}))
    assert load_config(kv) == load_config(js)
    assert load_config(js).topology.memory_qubits == 40


def test_bad_values_name_the_field():
    with pytest.raises(ConfigError, match="p_depo"):
        load_config(None, {"p_depo": "lots"})
    with pytest.raises(ConfigError, match="p_meas"):
        load_config(None, {"p_meas": 2.0})
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(None, {"colour": 1})
    with pytest.raises(ConfigError):
        parse_config_text("just words")
    with pytest.raises(ConfigError):
        parse_config_text("{not json")


def test_precedence_file_then_flags(tmp_path, monkeypatch):
    path = tmp_path / "c.cfg"
    path.write_text("seed = 5\np_depo = 0.04\n")
    monkeypatch.setenv(SEED_ENV, "11")
    assert load_config(None).seed == 11
    assert load_config(path).seed == 5
    s = load_config(path, {"seed": 9, "p_depo": None})
    assert s.seed == 9 and s.channel.p_depo == 0.04


def test_ablation_switches():
    s = load_config(None, disable=("mem", "loss", "dep", "gate", "meas"))
    c = s.channel
    assert math.isinf(c.tau) and c.loss_db_per_km == 0 and c.p_depo == 0 and c.lambda_gate == 0 and c.p_meas == 0
    with pytest.raises(ConfigError):
        load_config(None, disable=("cosmic-rays",))


def test_settings_flatten_roundtrip():
    s = load_config(None, {"tau": "disabled", "seed": 4})
    flat = s.to_flat()
    assert flat["tau"] == "disabled"
    assert load_config(None, flat) == s


# --- command line ---------------------------------------------------------------

def test_run_json(capsys):
    code = cli.main(["run", "--strategy", "e2e-hg-pe", "--hops", "2", "--gate-error", "0", "--meas-error", "0",
                     "--seed", "7", "--n-meas", "30", "--json"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["strategy"] == "E2E-HG-PE" and data["seed"] == 7 and data["hops"] == 2
    assert list(data) == list(cli.CSV_COLUMNS)


def test_json_roundtrip_is_lossless():
    r = run_strategy(StrategyConfig("OneG", 2, n_meas=30, seed=1))
    text = cli.result_to_json(r)
    record = cli.record_from_json(text)
    assert record == r.row()
    assert json.dumps(record, indent=2) == text


def test_run_text_output_and_out_file(tmp_path, capsys):
    out = tmp_path / "one.csv"
    assert cli.main(["run", "--strategy", "0g", "--n-meas", "30", "--out", str(out)]) == 0
    assert "ZeroG hops=2" in capsys.readouterr().out
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["strategy"] == "ZeroG"


def test_env_seed_fallback(monkeypatch, capsys):
    monkeypatch.setenv(SEED_ENV, "13")
    cli.main(["run", "--strategy", "ZeroG", "--n-meas", "30", "--json"])
    assert json.loads(capsys.readouterr().out)["seed"] == 13


@pytest.mark.parametrize("argv", [
    ["run", "--strategy", "bogus"],
    ["run", "--strategy", "ZeroG", "--hops", "3"],
    ["run", "--strategy", "ZeroG", "--disable", "gravity"],
    ["run"],
    ["frobnicate"],
])
def test_config_errors_exit_one(argv):
    try:
        code = cli.main(argv)
    except SystemExit as exc:  # argparse rejects before dispatch
        code = exc.code
    assert code == 1


def test_zero_tau_config_exits_one(tmp_path):
    path = tmp_path / "t.cfg"
    path.write_text("tau = 0")
    assert cli.main(["run", "--strategy", "ZeroG", "--config", str(path)]) == 1


def test_runtime_failure_exits_two(monkeypatch):
    def boom(cfg):
        raise RuntimeError("engine stalled")

    monkeypatch.setattr(cli, "run_strategy", boom)
    assert cli.main(["run", "--strategy", "ZeroG", "--n-meas", "30"]) == 2


def test_sweep_small_grid_is_byte_stable(tmp_path):
    args = ["sweep", "--strategies", "ZeroG,OneG", "--hops", "2", "--gate-errors", "0,0.002",
            "--meas-errors", "0,0.01", "--n-meas", "9", "--no-wall-clock", "--seed", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(a.open()))
    assert len(rows) == 8
    assert [(r["strategy"], r["lambda_gate"], r["p_meas"]) for r in rows[:4]] == [
        ("ZeroG", "0.0", "0.0"), ("ZeroG", "0.0", "0.01"), ("ZeroG", "0.002", "0.0"), ("ZeroG", "0.002", "0.01")]
    assert tuple(rows[0]) == cli.CSV_COLUMNS


def test_full_sweep_has_450_rows(tmp_path):
    out = tmp_path / "grid.csv"
    assert cli.main(["sweep", "--strategies", "all", "--hops", "2,4,8", "--n-meas", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 450
    assert {r["strategy"] for r in rows} == {"ZeroG", "OneG", "E2E-OneG", "TwoG", "HG-PE", "E2E-HG-PE"}
    assert {r["lambda_gate"] for r in rows} == {"0.0", "0.0005", "0.001", "0.0015", "0.002"}
    assert {r["p_meas"] for r in rows} == {"0.0", "0.0025", "0.005", "0.0075", "0.01"}


def test_sweep_json_output(tmp_path):
    out = tmp_path / "grid.json"
    cli.main(["sweep", "--strategies", "ZeroG", "--hops", "2", "--gate-errors", "0", "--meas-errors", "0",
              "--n-meas", "6", "--out", str(out)])
    data = json.loads(out.read_text())
    assert len(data) == 1 and data[0]["strategy"] == "ZeroG"


def test_parse_grid():
    grid = cli.parse_grid("0:0.2:0.01")
    assert len(grid) == 21 and grid[0] == 0.0 and grid[-1] == pytest.approx(0.2)
    assert cli.parse_grid("0:0.2:0.025")[-1] == pytest.approx(0.2)


@pytest.mark.parametrize("purified,oracle", [(False, f_e2e), (True, f_ssdp_e2e)])
def test_swap_validation_table(tmp_path, purified, oracle):
    out = tmp_path / "swap.csv"
    argv = ["validate-fig2", "--pdepo-grid", "0:0.1:0.05", "--samples", "600", "--trajectories", "2",
            "--out", str(out)]
    assert cli.main(argv + (["--purified"] if purified else [])) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["p_depo", "analytic_e2e", "simulated_e2e", "stderr"]
    assert len(rows) == 3
    for r in rows:
        assert float(r["analytic_e2e"]) == pytest.approx(oracle(float(r["p_depo"])))
    assert float(rows[0]["simulated_e2e"]) == 1.0
