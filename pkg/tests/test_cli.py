import json

import pytest

from xover import __version__, fixtures
from xover.cli import main
from xover.design import parse_design, render_design


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, "--format", "json", *argv)
    return code, json.loads(out)


def test_bound_json_envelope(capsys):
    code, env = run_json(capsys, "bound", "--t", "3", "--p", "3", "--n", "9", "--r0", "9")
    assert code == 0
    assert env["command"] == "bound"
    assert env["parameters"] == {"t": 3, "p": 3, "n": 9, "r0": 9}
    assert env["results"]["bound"] == pytest.approx(1.115909, abs=1e-4)
    assert env["version"] == __version__
    assert env["warnings"] == []
    assert env["seed"] is None


def test_bound_infeasible_exits_one(capsys):
    code, env = run_json(capsys, "bound", "--t", "3", "--p", "3", "--n", "9", "--r0", "7")
    assert code == 1
    assert "error" in env["results"]


def test_optimize_r0_profile(capsys):
    code, env = run_json(capsys, "optimize-r0", "--t", "5", "--p", "5", "--n", "50")
    assert code == 0
    assert env["results"]["best_r0"] == 60
    assert env["results"]["best_bound"] == pytest.approx(0.24179, abs=1e-4)
    entries = env["results"]["entries"]
    assert any(e["r0"] == 50 for e in entries)


def test_verify_optimal_fixture(tmp_path, capsys):
    path = tmp_path / "ex1.design"
    path.write_text(render_design(fixtures.load("ex1")))
    code, env = run_json(capsys, "verify", str(path))
    assert code == 0
    assert env["results"]["certificate"]["verdict"] == "optimal"
    assert env["results"]["balance"]["eligible"] is True


def test_verify_not_certified_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.design"
    path.write_text("2 3 3\n0 0 1\n1 2 0\n2 1 2\n")
    code, env = run_json(capsys, "verify", str(path))
    assert code == 1
    assert env["results"]["certificate"]["verdict"] == "not-certified"


def test_eval_reports_efficiencies(tmp_path, capsys):
    path = tmp_path / "ex7.design"
    path.write_text(render_design(fixtures.load("ex7")))
    code, env = run_json(capsys, "eval", str(path))
    assert code == 0
    assert env["parameters"]["model"] == "carryover"
    assert env["results"]["a_criterion"] == pytest.approx(0.55419, abs=1e-4)
    assert env["results"]["efficiencies"]["e_c"] == pytest.approx(0.993, abs=1e-3)


def test_eval_reduced_model(tmp_path, capsys):
    path = tmp_path / "ex1.design"
    path.write_text(render_design(fixtures.load("ex1")))
    code, env = run_json(capsys, "eval", str(path), "--model", "zero-way")
    assert code == 0
    assert env["results"]["a_criterion"] == pytest.approx(5 / 6)


def test_construct_roundtrip_and_determinism(tmp_path, capsys):
    out_file = tmp_path / "made.design"
    args = ("construct", "--t", "3", "--p", "3", "--n", "9",
            "--seed", "7", "--output", str(out_file))
    code, env = run_json(capsys, *args)
    assert code == 0
    assert env["seed"] == 7
    assert env["results"]["certificate"]["verdict"] == "optimal"
    first = parse_design(out_file.read_text())
    assert first == parse_design(env["results"]["design"])

    code, env2 = run_json(capsys, *args)
    assert code == 0
    assert env2["results"]["design"] == env["results"]["design"]


def test_construct_infeasible_exits_one(capsys):
    code, env = run_json(capsys, "construct", "--t", "6", "--p", "5", "--n", "30")
    assert code == 1
    assert "error" in env["results"]


def test_examples_writes_fixture_files(tmp_path, capsys):
    code, env = run_json(capsys, "examples", "--dest", str(tmp_path))
    assert code == 0
    written = env["results"]["written"]
    assert len(written) == len(fixtures.names())
    for name in fixtures.names():
        assert parse_design((tmp_path / f"{name}.design").read_text()) == fixtures.load(name)


def test_table1_row_subset(capsys):
    code, env = run_json(capsys, "table1", "--rows", "1,2")
    assert code == 0
    rows = env["results"]["rows"]
    assert [r["row"] for r in rows] == [1, 2]
    assert rows[0]["computed"]["e_c"] == pytest.approx(100.0, abs=0.5)
    assert env["warnings"] == []


def test_text_format_smoke(capsys):
    code, out = run_cli(capsys, "verify", "/nonexistent/path.design")
    assert code == 1
    code, out = run_cli(capsys, "bound", "--t", "3", "--p", "3", "--n", "9", "--r0", "9")
    assert code == 0
    assert "bound: 1.115909091" in out


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--t", "3"])
    assert exc.value.code == 2
