"""CLI subcommands and exit codes."""

import json

import pytest

from ific.cli import EXIT_AUDIT, EXIT_CONFIG, EXIT_OK, main


@pytest.fixture()
def short_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("scenario: wiping\nduration: 2.0\n")
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_run_reports_metrics_and_hash(short_config, tmp_path, capsys):
    out_csv = tmp_path / "trace.csv"
    code, out = run_cli(capsys, "run", "--config", str(short_config),
                        "--out", str(out_csv))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["metrics"]["scenario"] == "wiping"
    assert report["audit"]["passed"] is True
    assert len(report["trace_hash"]) == 64
    assert out_csv.exists()


def test_run_bad_config_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("controller: pid\n")
    code, _ = run_cli(capsys, "run", "--config", str(bad))
    assert code == EXIT_CONFIG


def test_run_is_deterministic(short_config, capsys):
    _, out_a = run_cli(capsys, "run", "--config", str(short_config))
    _, out_b = run_cli(capsys, "run", "--config", str(short_config))
    assert json.loads(out_a)["trace_hash"] == json.loads(out_b)["trace_hash"]


def test_compare_emits_table(short_config, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code, _ = run_cli(capsys, "compare", "--config", str(short_config),
                      "--controllers", "ific,ufic", "--out", str(report_path))
    assert code == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["schema_version"] == 1
    assert set(report["controllers"]) == {"ific", "ufic"}
    for row in report["controllers"].values():
        assert "metrics" in row and "audit" in row


def test_compare_rejects_unknown_controller(short_config, capsys):
    code, _ = run_cli(capsys, "compare", "--config", str(short_config),
                      "--controllers", "ific,mpc")
    assert code == EXIT_CONFIG


def test_audit_round_trip(short_config, tmp_path, capsys):
    out_csv = tmp_path / "trace.csv"
    run_cli(capsys, "run", "--config", str(short_config), "--out", str(out_csv))
    code, out = run_cli(capsys, "audit", str(out_csv), "--strict")
    assert code == EXIT_OK
    assert json.loads(out)["passed"] is True


def test_audit_missing_trace_exits_1(capsys):
    code, _ = run_cli(capsys, "audit", "/nonexistent/trace.csv")
    assert code == EXIT_CONFIG


def test_audit_strict_flags_doctored_trace(short_config, tmp_path, capsys):
    out_csv = tmp_path / "trace.csv"
    run_cli(capsys, "run", "--config", str(short_config), "--out", str(out_csv))
    from ific.trace import OFFSETS, Trace

    trace = Trace.load(out_csv)
    # inject free energy: inflate the force-tank column near the end
    start, _ = OFFSETS["e_ft"]
    trace.data[trace.n // 2:, start] += 5.0
    trace.save(out_csv)
    code, out = run_cli(capsys, "audit", str(out_csv), "--strict")
    assert code == EXIT_AUDIT
    assert json.loads(out)["passed"] is False
