import json

import pytest

from contextacert import exgraph as eg
from contextacert.cli import load_config, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["alpha", "--anticycle", "7"], "2"),
        (["alpha", "--cycle", "9"], "4"),
        (["alpha", "--counterexample6"], "2"),
    ],
)
def test_alpha(capsys, argv, expected):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == expected


def test_theta_text(capsys):
    code, out, _ = run(capsys, "theta", "--anticycle", "7")
    assert code == 0
    assert out.splitlines()[0] == "2.1099163"


def test_theta_json(capsys):
    code, out, _ = run(capsys, "theta", "--cycle", "5", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["command"] == "theta" and d["version"] == "0.1.0"
    assert abs(d["theta"] - 5**0.5) < 1e-6


@pytest.mark.parametrize(
    "argv, code, first",
    [
        (["classify", "--anticycle", "5"], 0, "SelfTestable"),
        (["classify", "--counterexample6"], 2, "NotSelfTestable"),
    ],
)
def test_classify_exit_codes(capsys, argv, code, first):
    got, out, _ = run(capsys, *argv)
    assert got == code and out.splitlines()[0] == first


def test_classify_json_fields(capsys):
    code, out, _ = run(capsys, "classify", "--counterexample6", "--format", "json")
    d = json.loads(out)
    assert code == 2
    assert (d["rank_X"], d["rank_Z"], d["null_dim"]) == (4, 3, 1)


def test_canonical(capsys):
    code, out, _ = run(capsys, "canonical", "antihole", "7", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["ensemble"]["n"] == 7
    assert d["ensemble"]["d"] == 5 and len(d["ensemble"]["vectors"][0]) == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["canonical", "antihole", "4"],
        ["theta"],
        ["theta", "--cycle", "5", "--anticycle", "5"],
        ["certify", "--anticycle", "5", "--device", "bogus"],
        ["theta", "--file", "/nonexistent/graph.txt"],
        ["robustness", "--anticycle", "5", "--levels", "0.5"],
        ["theta", "--cycle", "5", "--tol-gap", "-1"],
    ],
)
def test_errors_exit_one(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_certify_honest(capsys):
    code, out, _ = run(capsys, "certify", "--anticycle", "5", "--shots", "1000000")
    assert code == 0 and out.startswith("ACCEPT")


def test_certify_depolarized(capsys):
    code, out, _ = run(capsys, "certify", "--anticycle", "5", "--device", "depolarizing", "--eta", "1")
    assert code == 0 and out.startswith("REJECT")


def test_refusal_exit_two(capsys):
    code, _, err = run(capsys, "robustness", "--counterexample6", "--trials", "1")
    assert code == 2 and "refused" in err


def test_robustness_csv(capsys):
    code, out, _ = run(capsys, "robustness", "--anticycle", "5", "--levels", "0.001,0.01", "--trials", "2")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "level,trial,epsilon,distance" and len(lines) == 6
    assert lines[-1].startswith("# slope=")


def test_file_source(tmp_path, capsys):
    p = tmp_path / "nst6.json"
    p.write_text(json.dumps(eg.counterexample6().to_dict()))
    code, out, _ = run(capsys, "alpha", "--file", str(p))
    assert code == 0 and out.strip() == "2"


def test_config_file(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "json", "seed": 3}))
    monkeypatch.setenv("CONTEXTACERT_CONFIG", str(cfg))
    code, out, _ = run(capsys, "alpha", "--cycle", "5")
    assert code == 0 and json.loads(out)["config"]["seed"] == 3
    cfg.write_text(json.dumps({"colour": "blue"}))
    code, _, err = run(capsys, "alpha", "--cycle", "5")
    assert code == 1 and "colour" in err


def test_load_config_defaults():
    assert load_config({}).format == "text"
