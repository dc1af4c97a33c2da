import json
import subprocess
import sys

import jsonschema
import pytest

from histent import hardy
from histent.circuit import dump_circuit
from histent.cli import main
from histent.report import REPORT_SCHEMA, fmt_complex, fmt_real


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bundled(tmp_path):
    path = tmp_path / "hardy.scenario"
    path.write_text(hardy.bundled_scenario_text())
    return path


@pytest.mark.parametrize("flags", [[], ["--no-keep-a"], ["--no-keep-b"], ["--no-keep-a", "--no-keep-b"]])
def test_hardy_json_validates(capsys, flags):
    code, out, _ = run(capsys, "hardy", *flags, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["kind"] == "hardy"


def test_hardy_json_values(capsys):
    doc = json.loads(run(capsys, "hardy", "--format", "json")[1])
    a6b6 = next(b for b in doc["postselections"] if b["name"] == "a6b6")
    assert a6b6["propagator"]["shape"] == [2, 2]
    assert [e["re"] for e in a6b6["propagator"]["entries"]] == pytest.approx([-0.25, 0.25, 0.25, 0])
    assert a6b6["concurrence"] == pytest.approx(2 / 3, abs=1e-12)
    assert doc["combined"]["propagator"]["shape"] == [4, 4]
    assert doc["lhv"]["contradictedConstraint"] == "l1"
    assert doc["noSignalling"] is True


def test_output_is_deterministic(capsys):
    first = run(capsys, "hardy", "--format", "json")[1]
    second = run(capsys, "hardy", "--format", "json")[1]
    assert first == second
    assert run(capsys, "nonlocality")[1] == run(capsys, "nonlocality")[1]


def test_hardy_table_output(capsys):
    code, out, _ = run(capsys, "hardy")
    assert code == 0
    assert "concurrence: 0.666667 (2/3)" in out
    assert "P(a5, b5) = 0.5625 (9/16)" in out
    assert "contradiction at l1" in out


def test_nonlocality_command(capsys):
    code, out, _ = run(capsys, "nonlocality")
    assert code == 0
    assert "INFEASIBLE: x1+=0 (from l2,l8); y1+=0 (from l3,l6); contradiction at l1" in out
    assert "no-signalling: true" in out
    code, out, _ = run(capsys, "nonlocality", "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert len(doc["tables"]) == 4 and len(doc["constraints"]) == 8


def test_run_matches_hardy(capsys, bundled):
    code, out, _ = run(capsys, "run", str(bundled), "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    ref = json.loads(run(capsys, "hardy", "--format", "json")[1])
    assert doc["postselections"] == ref["postselections"]
    assert doc["combined"] == ref["combined"]
    assert doc["detectionTable"]["joint"] == ref["detectionTable"]["joint"]


def test_run_single_postselection(capsys, bundled):
    code, out, _ = run(capsys, "run", str(bundled), "--post", "a6b6", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and [b["name"] for b in doc["postselections"]] == ["a6b6"]
    assert doc["combined"] is None


def test_run_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "run", str(tmp_path / "missing.scenario"))
    assert code == 1 and "cannot read" in err


def test_run_bad_scenario(capsys, tmp_path):
    doc = json.loads(hardy.bundled_scenario_text())
    doc["steps"][2]["mapA"]["3"] = [{"to": 5, "re": 0.9}]
    path = tmp_path / "bad.scenario"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "run", str(path))
    assert code == 1 and "steps[2].mapA" in err


def test_run_unknown_postselection(capsys, bundled):
    code, _, err = run(capsys, "run", str(bundled), "--post", "a9b9")
    assert code == 2 and "a9b9" in err and "a6b6" in err


def test_run_zero_propagator(capsys, tmp_path):
    path = tmp_path / "removed.scenario"
    path.write_text(dump_circuit(hardy.build(hardy.HardyConfig(False, False))))
    code, _, err = run(capsys, "run", str(path), "--post", "a5b5")
    assert code == 3 and "vanish" in err
    assert run(capsys, "run", str(path), "--post", "a6b6")[0] == 0


def test_usage_errors(capsys):
    assert run(capsys, "hardy", "--bogus")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "hardy", "--format", "xml")[0] == 2


def test_tolerance_environment(capsys, monkeypatch):
    monkeypatch.setenv("HISTENT_TOLERANCE", "0.5")
    doc = json.loads(run(capsys, "hardy", "--format", "json")[1])
    a6b6 = next(b for b in doc["postselections"] if b["name"] == "a6b6")
    assert a6b6["rank"] == 1
    monkeypatch.setenv("HISTENT_TOLERANCE", "nope")
    code, _, err = run(capsys, "hardy")
    assert code == 2 and "HISTENT_TOLERANCE" in err
    monkeypatch.setenv("HISTENT_TOLERANCE", "-1")
    assert run(capsys, "hardy")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "histent", "nonlocality"], capture_output=True, text=True)
    assert proc.returncode == 0 and "contradiction at l1" in proc.stdout


def test_number_formatting():
    assert fmt_real(0.5625) == "0.5625 (9/16)"
    assert fmt_real(1 / 3) == "0.333333 (1/3)"
    assert fmt_real(2 ** 0.5) == "1.41421"
    assert fmt_complex(-0.25j) == "-0.25i (-i/4)"
    assert fmt_complex(0.75j) == "0.75i (3i/4)"
    assert fmt_complex(0.5 - 0.5j) == "0.5-0.5i"
