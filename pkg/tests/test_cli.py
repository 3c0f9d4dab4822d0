import json

import pytest

from bairelab.cli import main

FAST = ["--pairs", "20000", "--scan", "100"]


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None), out


def verdicts(report):
    return {c["id"]: c["verdict"] for c in report["report"]["conditions"]}


def test_classify_jumpsum(tmp_path):
    code, rep, _ = run(tmp_path, "classify", "--func", "builtin:jumpsum", "--jump-n", "20",
                       "--eps", "0.5,0.25,0.125", *FAST)
    assert code == 0
    v = verdicts(rep)
    assert all(v[k] == "witnessed" for k in ("C2", "C3", "C4", "C5"))
    assert rep["report"]["truncation"] == 20


def test_classify_dirichlet(tmp_path):
    code, rep, _ = run(tmp_path, "classify", "--func", "builtin:dirichlet", *FAST)
    assert code == 0 and verdicts(rep)["C3"] == "refuted"


def test_missing_file_is_input_error(tmp_path):
    assert main(["classify", "--func", str(tmp_path / "missing.bdsl")]) == 2


def test_bad_eps_is_input_error():
    assert main(["gauge", "--func", "builtin:step", "--eps", "abc"]) == 2


def test_unknown_command_and_flag():
    assert main(["bogus"]) == 2
    assert main(["gauge", "--nope"]) == 2


def test_falsify_expect_pass(tmp_path):
    code, rep, out = run(tmp_path, "falsify", "--func", "builtin:step", "--gauge", "abs(x)/2",
                         "--eps", "0.5", "--pairs", "1000000", "--seed", "7", "--expect-pass")
    assert code == 0
    assert rep["report"]["violation_count"] == 0 and rep["report"]["pairs_tested"] >= 10**6
    assert (tmp_path / "out.json.meta.json").exists()


def test_falsify_reports_failure(tmp_path):
    code, rep, out = run(tmp_path, "falsify", "--func", "builtin:step", "--gauge", "const:1",
                         "--eps", "1/2", "--pairs", "5000", "--expect-pass")
    assert code == 1 and not rep["passed"]
    rows = (tmp_path / "out.violations.csv").read_text().splitlines()
    assert rows[0] == "x,y,fx,fy,bound" and len(rows) > 1


def test_falsify_csv_format(tmp_path, capsys):
    assert main(["falsify", "--func", "builtin:dirichlet", "--gauge", "const:1/10", "--eps",
                 "1/2", "--pairs", "5000", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("x,y,fx,fy,bound")


def test_left_demo_default(tmp_path):
    code, rep, _ = run(tmp_path, "left-demo", "--default", "--samples", "500", "--scan", "200",
                       "--expect-pass")
    assert code == 0 and rep["report"]["passed"]
    assert rep["report"]["preimage"]["not_F_sigma"]


def test_left_demo_bad_witness():
    assert main(["left-demo", "--func", "x", "--trunc", "10", "--samples", "10",
                 "--scan", "10"]) == 2


def test_engine_error_exit_code(tmp_path):
    # a limit definition has no exact preimages, so base composition cannot run
    src = tmp_path / "lim.bdsl"
    src.write_text("limit L { seq(n): x/n; mode: pointwise }\n")
    assert main(["base-compose", "--func", str(src), "--corpus", "2", "--depth", "1"]) == 3


@pytest.mark.parametrize("argv", [
    ["gauge", "--func", "builtin:step", "--eps", "1/2", "--pairs", "5000"],
    ["cover", "--func", "builtin:step", "--gauge", "abs(x)/2", "--eps", "1/2", "--pairs", "5000"],
    ["stable", "--func", "builtin:step", "--samples", "300", "--horizon", "16"],
    ["compose", "--func", "builtin:step", "--samples", "100", "--horizon", "24"],
    ["base-compose", "--func", "builtin:step", "--depth", "3"],
])
def test_commands_are_deterministic(tmp_path, argv):
    c1, _, o1 = run(tmp_path, *argv, "--expect-pass", name="a.json")
    c2, _, o2 = run(tmp_path, *argv, "--expect-pass", name="b.json")
    assert c1 == c2 == 0
    assert o1.read_bytes() == o2.read_bytes()


def test_bdsl_function_and_gauge(tmp_path):
    src = tmp_path / "defs.bdsl"
    src.write_text("func pw { piece on (-inf,0]: x^2; piece on [0,inf): sin(x) }\n"
                   "gauge d: 1/1000\n")
    code, rep, _ = run(tmp_path, "falsify", "--func", f"{src}:pw", "--gauge", str(src),
                       "--eps", "1/2", "--pairs", "20000", "--expect-pass")
    assert code == 0
    assert "1/1000" in rep["report"]["gauge"] and "pw" in rep["report"]["function"]


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "lab.cfg"
    cfg.write_text("# lab settings\nseed = 11\npairs = 3000\nwindow = -1,1\n")
    monkeypatch.setenv("BAIRE_LAB_CONFIG", str(cfg))
    argv = ["falsify", "--func", "builtin:step", "--gauge", "abs(x)/2", "--eps", "1/2"]
    _, rep, _ = run(tmp_path, *argv, "--seed", "4")
    assert rep["config"]["seed"] == 4
    assert rep["config"]["pairs"] == 3000
    assert rep["config"]["window"] == ["-1", "1"]
    assert rep["config"]["config_file"] == str(cfg)
    other = tmp_path / "explicit.cfg"
    other.write_text("pairs = 2000\n")
    _, rep, _ = run(tmp_path, *argv, "--config", str(other), name="b.json")
    assert rep["config"]["pairs"] == 2000 and rep["config"]["seed"] == 0


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["stable", "--func", "builtin:step", "--config", str(cfg)]) == 2
