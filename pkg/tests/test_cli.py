import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from ualw import cli, scenarios, workbench


@pytest.fixture
def cpl_file(tmp_path):
    p = tmp_path / "cpl.wb"
    p.write_bytes(scenarios.path("cpl-family").read_bytes())
    return str(p)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report_lines(out):
    return [json.loads(line) for line in out.splitlines()]


def test_repro_dialectic(capsys):
    code, out, _ = run(capsys, "repro", "dialectic")
    assert code == 0
    recs = report_lines(out)
    validator = jsonschema.Draft202012Validator(workbench.schema("report"))
    for r in recs:
        validator.validate(r)
    summary = recs[-1]
    assert summary["summary"] and summary["ok"] and summary["version"]
    by_check = {r["check"]: r for r in recs[:-1]}
    assert by_check["cond4"]["holds"] and not by_check["cond4b"]["holds"]


def test_report_byte_identical(capsys):
    a = run(capsys, "repro", "mod5-not-condsub")[1]
    b = run(capsys, "repro", "mod5-not-condsub")[1]
    assert a == b
    assert "seconds" not in a


def test_jobs_preserve_order(capsys):
    a = run(capsys, "repro", "cpl-family")[1]
    b = run(capsys, "repro", "cpl-family", "--jobs", "2")[1]
    assert a == b


def test_timing_flag(capsys):
    out = run(capsys, "repro", "cpl-4a-fails", "--timing")[1]
    assert all("seconds" in r for r in report_lines(out))


def test_lindenbaum_cpl(capsys, cpl_file):
    code, out, _ = run(capsys, "lindenbaum", cpl_file, "--logic", "P1")
    assert code == 0 and "size: 4" in out.splitlines()
    code, out, _ = run(capsys, "lindenbaum", cpl_file, "--logic", "P2", "--format", "json")
    d = json.loads(out)
    assert d["size"] == 16 and len(d["elements"]) == 16 and len(d["tables"]["and"]) == 256


def test_exit_codes(capsys, cpl_file, tmp_path):
    assert run(capsys, "check", str(tmp_path / "missing.wb"))[0] == 2
    assert run(capsys, "repro", "nope")[0] == 2
    assert run(capsys, "bogus-command")[0] == 2
    assert run(capsys, "check", cpl_file)[0] == 0
    assert run(capsys, "lindenbaum", cpl_file, "--logic", "NOPE")[0] == 2
    assert run(capsys, "si", cpl_file, "--logic", "P1", "p", "not(not(p))")[0] == 0
    assert run(capsys, "si", cpl_file, "--logic", "P1", "p", "not(p)")[0] == 1
    assert run(capsys, "si", cpl_file, "--logic", "P1", "p", "and(p")[0] == 2
    assert run(capsys, "entails", cpl_file, "--logic", "P2", "and(p,q)", "p", "--hyp", "p", "q")[0] == 0
    assert run(capsys, "entails", cpl_file, "--logic", "P2", "p", "q")[0] == 1


def test_failing_expectation_exits_1(capsys, tmp_path):
    d = json.loads(scenarios.path("cpl-4a-fails").read_text())
    d["checks"][1]["expect"] = "pass"
    p = tmp_path / "flip.wb"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "check", str(p), "--format", "text")
    assert code == 1 and "1 not met" in out


def test_validate(capsys, cpl_file, tmp_path):
    code, out, _ = run(capsys, "validate", "--scenarios")
    assert code == 0 and out.count("valid:") == 10
    bad = tmp_path / "bad.wb"
    bad.write_text('{"version": 1, "logics": {"x": {"atoms": []}}}')
    code, _, err = run(capsys, "validate", cpl_file, str(bad))
    assert code == 2 and "invalid" in err


def test_list_scenarios(capsys):
    code, out, _ = run(capsys, "list-scenarios")
    assert code == 0 and out.split() == scenarios.list_scenarios()


@pytest.mark.skipif(shutil.which("ualw") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["ualw", "repro", "dialectic", "--format", "text"], capture_output=True, text=True)
    assert p.returncode == 0 and "all expectations met" in p.stdout
    p = subprocess.run([sys.executable, "-m", "ualw.cli", "check", "missing.wb"], capture_output=True, text=True)
    assert p.returncode == 2 and "missing.wb" in p.stderr
