"""Command-line behavior: subcommands, formats, exit codes, determinism."""

import json
import subprocess
import sys

import pytest

from areaangle import CSV_HEADER, load_area_spec, load_case, partition_area
from areaangle.cli import main
from conftest import FIVE_BUS_AREA, FIVE_BUS_CASE

CASE = str(FIVE_BUS_CASE)
AREA = str(FIVE_BUS_AREA)


def test_baseline_table(capsys):
    assert main(["baseline", "--case", CASE, "--area", AREA]) == 0
    out = capsys.readouterr().out
    assert "105.042262441" in out
    assert "b_area" in out
    assert "54.5454545455" in out


def test_baseline_csv_and_json(capsys):
    assert main(["baseline", "--case", CASE, "--area", AREA, "--format", "csv"]) == 0
    csv_out = capsys.readouterr().out
    assert csv_out.startswith("field,value\n")
    assert "weight_bus_5,-0.8" in csv_out

    assert main(["baseline", "--case", CASE, "--area", AREA, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["p_area"] == 100.0
    assert doc["meta"]["tool"] == "areaangle"


def test_scan_csv(capsys):
    code = main(["scan", "--case", CASE, "--area", AREA, "--format", "csv"])
    assert code == 0
    captured = capsys.readouterr()
    rows = captured.out.strip().split("\n")
    assert rows[0] == CSV_HEADER
    assert len(rows) == 10
    assert rows[-1].startswith("base,")
    assert "scanned 8 outages" in captured.err


def test_scan_writes_file(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code = main(["scan", "--case", CASE, "--area", AREA, "--format", "csv",
                 "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith(CSV_HEADER)


def test_scan_json_matches_csv_numbers(tmp_path):
    csv_path = tmp_path / "scan.csv"
    json_path = tmp_path / "scan.json"
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "csv",
                 "--out", str(csv_path)]) == 0
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "json",
                 "--out", str(json_path)]) == 0
    doc = json.loads(json_path.read_text())
    line7 = next(e for e in doc["outages"] if e["line_id"] == 7)
    row7 = next(r for r in csv_path.read_text().splitlines() if r.startswith("7,"))
    cells = row7.split(",")
    assert float(cells[2]) == line7["theta_monitored_deg"]
    assert float(cells[6]) == line7["ratio"]


def test_fast_path_flag_changes_nothing_here(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    on = tmp_path / "on.csv"
    off = tmp_path / "off.csv"
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "csv",
                 "--fast-path", "on", "--out", str(on)]) == 0
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "csv",
                 "--fast-path", "off", "--out", str(off)]) == 0
    assert on.read_text() == off.read_text()


def test_jobs_flag_changes_nothing(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    one = tmp_path / "one.json"
    many = tmp_path / "many.json"
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "json",
                 "--jobs", "1", "--out", str(one)]) == 0
    assert main(["scan", "--case", CASE, "--area", AREA, "--format", "json",
                 "--jobs", "6", "--out", str(many)]) == 0
    assert one.read_bytes() == many.read_bytes()


def test_missing_file_is_input_error(capsys):
    assert main(["baseline", "--case", "/no/such/file.json", "--area", AREA]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_json_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["baseline", "--case", str(bad), "--area", AREA]) == 1
    assert "not valid JSON" in capsys.readouterr().err


def test_bad_area_is_input_error(tmp_path, capsys):
    area = tmp_path / "area.json"
    area.write_text(json.dumps({"area_buses": [1, 99], "side_a": [1], "side_b": [99]}))
    assert main(["baseline", "--case", CASE, "--area", str(area)]) == 1
    assert "99" in capsys.readouterr().err


def test_unwritable_out_is_input_error(tmp_path, capsys):
    target = tmp_path / "missing-dir" / "out.csv"
    code = main(["baseline", "--case", CASE, "--area", AREA, "--out", str(target)])
    assert code == 1


def test_degenerate_direction_is_exit_2(tmp_path, capsys):
    # dead-end area: nothing flows through it, so no stress direction exists
    case = tmp_path / "case.json"
    area = tmp_path / "area.json"
    case.write_text(json.dumps({
        "slack_bus": 3,
        "buses": [
            {"id": 1}, {"id": 2},
            {"id": 3, "injection": 5.0}, {"id": 4, "injection": -5.0},
        ],
        "lines": [
            {"id": 1, "from": 1, "to": 2, "susceptance": 4.0},
            {"id": 2, "from": 1, "to": 2, "susceptance": 6.0},
            {"id": 3, "from": 3, "to": 1, "susceptance": 2.0},
            {"id": 4, "from": 3, "to": 4, "susceptance": 2.0},
        ],
    }))
    area.write_text(json.dumps({"area_buses": [1, 2], "side_a": [1], "side_b": [2]}))
    code = main(["scan", "--case", str(case), "--area", str(area)])
    assert code == 2
    assert "stress direction undefined" in capsys.readouterr().err


def test_numeric_failure_is_exit_3(tmp_path, capsys):
    case = tmp_path / "case.json"
    area = tmp_path / "area.json"
    case.write_text(json.dumps({
        "slack_bus": 2,
        "buses": [{"id": 1, "injection": 1.0}, {"id": 2, "injection": -1.0}],
        "lines": [{"id": 1, "from": 1, "to": 2, "susceptance": 1e-320}],
    }))
    area.write_text(json.dumps({"area_buses": [1, 2], "side_a": [1], "side_b": [2]}))
    code = main(["baseline", "--case", str(case), "--area", str(area)])
    assert code == 3
    assert "residual" in capsys.readouterr().err


def test_gen_roundtrip(tmp_path, capsys):
    case = tmp_path / "gen_case.json"
    area = tmp_path / "gen_area.json"
    code = main(["gen", "--seed", "5", "--buses", "36", "--topology", "bypass",
                 "--paths", "3", "--limit-factor", "1.5",
                 "--out", str(case), "--area-out", str(area)])
    assert code == 0
    assert "wrote" in capsys.readouterr().err
    net = load_case(case)
    spec = load_area_spec(area, net)
    partition_area(net, spec)
    assert main(["scan", "--case", str(case), "--area", str(area),
                 "--format", "csv", "--out", str(tmp_path / "scan.csv")]) == 0


def test_gen_rejects_bad_limit_factor(tmp_path, capsys):
    code = main(["gen", "--seed", "1", "--limit-factor", "0.5",
                 "--out", str(tmp_path / "c.json"),
                 "--area-out", str(tmp_path / "a.json")])
    assert code == 1
    assert "must exceed 1" in capsys.readouterr().err


def test_unknown_format_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["baseline", "--case", CASE, "--area", AREA, "--format", "yaml"])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "areaangle", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "areaangle" in proc.stdout


def test_console_script_runs_baseline():
    proc = subprocess.run(
        ["areaangle", "baseline", "--case", CASE, "--area", AREA, "--format", "csv"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("field,value")
