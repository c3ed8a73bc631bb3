import json
import subprocess
import sys

import numpy as np
import pytest

from coherence_transfer import cli, runner


def test_parse_example_configs():
    cfg = runner.parse_config('{"scenario":"one-qubit","network":4,"rsp":1,"checkpoint":1,"visibilities":[1,1],"seed":7}')
    assert cfg.seed == 7 and cfg.get("rsp") == 1 and cfg.get("visibilities") == (1.0, 1.0)
    dqd = runner.parse_config('{"scenario":"dqd","gamma_l":4,"gamma_r":0.1,"delta":1}')
    assert (dqd.get("gamma_l"), dqd.get("gamma_r"), dqd.get("delta")) == (4.0, 0.1, 1.0)


def test_rejections_name_the_field():
    with pytest.raises(runner.ConfigError, match="rsp"):
        runner.parse_config('{"scenario":"one-qubit","rsp":9}')
    with pytest.raises(runner.ConfigError, match="colour"):
        runner.parse_config('{"scenario":"one-qubit","colour":1}')
    with pytest.raises(runner.ConfigError, match="visibilities"):
        runner.parse_config('{"scenario":"one-qubit","visibilities":[1.5, 1]}')
    with pytest.raises(runner.ConfigError, match="visibilities"):
        runner.parse_config('{"scenario":"two-qubit","network":6,"visibilities":[1, 1]}')
    with pytest.raises(runner.ConfigError, match="scenario"):
        runner.parse_config('{"scenario":"four-qubit"}')
    with pytest.raises(runner.ConfigError, match="dt"):
        runner.parse_config('{"scenario":"dqd","dt":0.1}')
    with pytest.raises(runner.ConfigError, match="duplicate"):
        runner.parse_config('{"scenario":"dqd","delta":1,"delta":2}')


def test_parse_error_reports_position():
    with pytest.raises(runner.ConfigError, match=r"line 2, column 3"):
        runner.parse_config('{"scenario":"dqd",\n  ]')


def test_run_examples():
    r = runner.run(runner.parse_config('{"scenario":"one-qubit","rsp":3}'))
    assert r["q_value"] == pytest.approx(0.0, abs=1e-12)
    r = runner.run(runner.parse_config('{"scenario":"two-qubit","variant":"control","checkpoint":1}'))
    assert r["q_value"] == pytest.approx(0.0, abs=1e-12)
    assert r["provenance"]["seed"] == 0
    assert r["provenance"]["config"]["variant"] == "control"
    assert r["provenance"]["tool_version"]


def test_q2_csv_layout():
    r = runner.run(runner.parse_config('{"scenario":"one-qubit","network":4,"rsp":1,"checkpoint":1}'))
    lines = runner.csv_text(r).splitlines()
    assert lines[0] == "k,i,p_diag,p_checkpoint"
    assert len(lines) == 1 + 4 + 1
    assert lines[-1] == "Q,2.000000000000"
    # k-major then i
    assert [ln.split(",")[:2] for ln in lines[1:5]] == [["1", "0"], ["1", "1"], ["2", "0"], ["2", "1"]]


def test_number_format():
    assert runner.fmt(2.0) == "2.000000000000"
    assert runner.fmt(-0.0) == "0.000000000000"
    assert runner.fmt(1.5e-20) == "1.500000000000e-20"
    assert runner.fmt(0.1) == "0.1000000000000"


def test_sweep_csv_tau_zero_rows():
    cfg = runner.parse_config('{"scenario":"dqd","t0_max":1.0,"tau_max":1.0,"points":5,"dt":0.001}')
    text = runner.csv_text(runner.run(cfg))
    rows = [ln.split(",") for ln in text.splitlines()[1:]]
    assert len(rows) == 25
    assert all(float(q) == 0.0 for t0, tau, q in rows if float(tau) == 0.0)
    # t0-major order
    assert [float(r[0]) for r in rows[:5]] == [0.0] * 5


def test_probability_rows_sum_to_one():
    for text in ('{"scenario":"one-qubit","network":6,"rsp":2,"checkpoint":2,"visibilities":[0.9,0.95,1]}',
                 '{"scenario":"two-qubit","network":6,"checkpoint":2}'):
        r = runner.run(runner.parse_config(text))
        for table in ("p_diag", "p_checkpoint"):
            assert np.allclose(np.sum(r[table], axis=1), 1, atol=1e-9)


def test_lp_selftest_runner():
    r = runner.lp_selftest(cases=30, max_vars=10, seed=4)
    assert r["max_abs_diff"] < 1e-8
    assert runner.csv_text(r).splitlines()[-1].startswith("max_abs_diff,")


def test_json_emission_roundtrip(tmp_path):
    cfg = runner.parse_config('{"scenario":"one-qubit","oracle_trials":1000,"seed":3}')
    r = runner.run(cfg)
    path = runner.emit_json(r, tmp_path / "r.json")
    data = json.loads(path.read_text())
    assert data["q_value"] == 2.0
    assert data["oracle_bound"] >= 2.0 - 1e-9
    assert runner.parse_config(json.dumps(data["provenance"]["config"])) == cfg


def test_emit_csv_io_error(tmp_path):
    r = runner.run(runner.parse_config('{"scenario":"one-qubit"}'))
    with pytest.raises(OSError):
        runner.emit_csv(r, tmp_path / "missing" / "out.csv")


# --- CLI --------------------------------------------------------------------

def test_cli_success_and_file_output(tmp_path, capsys):
    out = tmp_path / "q.csv"
    assert cli.main(["onequbit", "--network", "4", "--rsp", "1", "--checkpoint", "1", "--out", str(out)]) == 0
    assert out.read_text().endswith("Q,2.000000000000\n")
    assert cli.main(["twoqubit", "--variant", "control", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["q_value"] == 0.0


def test_cli_validation_exit_code(tmp_path, capsys):
    assert cli.main(["onequbit", "--rsp", "9"]) == 1
    assert "rsp" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": "one-qubit",\n "rsp": }')
    assert cli.main(["onequbit", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["triangle"]) == 1  # seed required
    assert cli.main(["onequbit", "--config", str(tmp_path / "nope.json")]) == 1
    other = tmp_path / "other.json"
    other.write_text('{"scenario": "dqd"}')
    assert cli.main(["onequbit", "--config", str(other)]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 1


def test_cli_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"scenario": "one-qubit", "rsp": 3}')
    assert cli.main(["onequbit", "--rsp", "1", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.endswith("Q,0.000000000000\n")


def test_cli_solver_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise runner.SolverError("forced")
    monkeypatch.setattr(runner, "run", boom)
    assert cli.main(["onequbit"]) == 2
    assert "forced" in capsys.readouterr().err


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "coherence_transfer.cli", "lp-selftest", "--cases", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("case,n_vars,simplex,enumeration")
