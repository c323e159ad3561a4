from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from charclasses.cli import main
from charclasses.exactalg import Context, Field, parse_expr

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
ALL = sorted(SCENARIOS.glob("*.yaml"))


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def machine(path, capsys, *extra):
    code, out, _ = run([path, "--format", "machine", *extra], capsys)
    return code, json.loads(out)


def test_sl2_cohomology(capsys):
    code, rep = machine(SCENARIOS / "sl2_cohomology.yaml", capsys)
    assert code == 0
    tasks = {r["task"]: r for r in rep["records"]}
    assert tasks["cohomology"]["result"]["dims"] == [1, 0, 0, 1]
    assert tasks["exact"]["result"]["outcome"] == "NOT_EXACT"


def test_bad_jacobi_fails_validation(capsys):
    code, rep = machine(SCENARIOS / "bad_jacobi.yaml", capsys)
    assert code == 1
    assert rep["records"][0]["task"] == "validate"
    assert rep["records"][0]["status"] == "VIOLATION"


def test_tangent_line_intrinsic_class_vanishes(capsys):
    code, rep = machine(SCENARIOS / "tangent_r1_intrinsic.yaml", capsys)
    assert code == 0
    res = rep["records"][1]["result"]
    assert res["form"]["components"] == []
    assert res["class"]["outcome"] == "EXACT"
    assert "witness" in res["class"]


def test_weight_representation_pathways(capsys):
    code, rep = machine(SCENARIOS / "one_dim_weight.yaml", capsys)
    assert code == 0
    forms = [r["result"]["form"]["components"] for r in rep["records"] if r["task"] == "secondary"]
    assert all(f == [[[1], "2*lam"]] for f in forms)


def test_poisson_modular_class_certified(capsys):
    code, rep = machine(SCENARIOS / "poisson_modular.yaml", capsys)
    assert code == 0
    intr = next(r for r in rep["records"] if r["task"] == "intrinsic")
    assert intr["result"]["form"]["components"] == [[[1], "1"]]
    assert intr["result"]["class"]["outcome"] == "NOT_EXACT"


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_machine_reports_are_deterministic(path, capsys):
    first = run([path, "--format", "machine", "--check"], capsys)
    second = run([path, "--format", "machine", "--check"], capsys)
    assert first == second


def collect_expressions(node, out):
    if isinstance(node, dict):
        if "components" in node and "degree" in node:
            for _, value in node["components"]:
                if isinstance(value, str):
                    out.append(value)
                else:
                    out.extend(v for row in value for v in row)
        else:
            for v in node.values():
                collect_expressions(v, out)
    elif isinstance(node, list):
        for v in node:
            collect_expressions(v, out)


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_expressions_round_trip(path, capsys):
    import yaml
    doc = yaml.safe_load(path.read_text())
    names = tuple(doc.get("chart") or []) + tuple(doc.get("parameters") or [])
    _, rep = machine(path, capsys)
    ctx = Context(names, Field.parse(rep["field"]))
    exprs = []
    collect_expressions(rep, exprs)
    for text in exprs:
        assert str(parse_expr(text, ctx)) == text


def test_check_mode_adds_invariants(capsys):
    _, rep = machine(SCENARIOS / "poisson_modular.yaml", capsys, "--check")
    checks = [r for r in rep["records"] if r["task"] == "check"]
    assert checks and all(r["status"] == "OK" for r in checks)


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run([SCENARIOS / "sl2_cohomology.yaml", "--format", "machine", "--out", target], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["records"][1]["result"]["dims"] == [1, 0, 0, 1]


def test_human_report(capsys):
    code, out, _ = run([SCENARIOS / "one_dim_weight.yaml"], capsys)
    assert code == 0
    assert "(2*lam)*e1" in out and "... OK" in out


@pytest.mark.parametrize("text, needle", [
    ("algebroid:\n  rank: 1\n  structure: [1, 2\n", ":4:1:"),
    ("algebroid:\n  rank: 1\ntasks:\n  - frobnicate\n", "unknown task"),
    ("algebroid:\n  rank: 1\ntasks:\n  - ch: {connection: nope}\n", "undeclared connection"),
    ("chart: [x]\nalgebroid:\n  rank: 1\n  anchor: [[\"x*+1\"]]\n", "position 2"),
])
def test_parse_errors_exit_2(tmp_path, capsys, text, needle):
    f = tmp_path / "s.yaml"
    f.write_text(text)
    code, _, err = run([f], capsys)
    assert code == 2
    assert needle in err


def test_usage_errors(capsys, tmp_path):
    assert run([tmp_path / "missing.yaml"], capsys)[0] == 2
    assert run([SCENARIOS / "sl2_cohomology.yaml", "--truncation", "-1"], capsys)[0] == 2
    assert run([SCENARIOS / "sl2_cohomology.yaml", "--field", "R"], capsys)[0] == 2


def test_truncation_flag_leaves_question_open(tmp_path, capsys):
    f = tmp_path / "s.yaml"
    f.write_text("chart: [x]\nalgebroid:\n  rank: 1\n  anchor: [[\"1\"]]\n"
                 "tasks:\n  - exact: {form: {degree: 1, components: [[[1], \"x^4\"]]}}\n")
    code, rep = machine(f, capsys, "--truncation", "2")
    assert code == 0
    assert rep["records"][1]["status"] == "UNDECIDED"
    code, rep = machine(f, capsys)
    assert rep["records"][1]["result"]["outcome"] == "EXACT"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "charclasses", str(SCENARIOS / "sl2_cohomology.yaml"),
                           "--format", "machine"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["field"] == "Q"
