"""Command-line front end: exit codes, output shape, tracing."""

import json

import pytest

from fdcc.cli import main

from conftest import GOLDEN_EQ

SAT = "(declare-int x 0 5)\n(declare-int y 0 5)\n(distinct x y)\n"


def _file(tmp_path, text, name="f.fdcc"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_sat_exit_zero_with_model_line(tmp_path, capsys):
    rc = main(["solve", _file(tmp_path, SAT)])
    out = capsys.readouterr().out.splitlines()
    assert rc == 0
    assert out[0] == "sat"
    assert out[1].startswith("(model ")
    assert "(x 0)" in out[1] and "(y 1)" in out[1]


def test_unsat_exit_one(tmp_path, capsys):
    rc = main(["solve", _file(tmp_path, GOLDEN_EQ)])
    out = capsys.readouterr().out.splitlines()
    assert rc == 1
    assert out == ["unsat"]


def test_unknown_exit_two_reason_on_stderr(tmp_path, capsys):
    text = ("(declare-int x 0 90)\n(declare-int y 0 90)\n"
            "(declare-int z 0 90)\n(mul x y z)\n(mul y z x)\n(mul z x y)\n"
            "(distinct x y)\n(distinct y z)\n(distinct x z)\n"
            "(leq (+ (* 1 x) (* 1 y) (* 1 z)) 2)\n")
    rc = main(["solve", _file(tmp_path, text), "--max-decisions", "0"])
    cap = capsys.readouterr()
    if rc == 2:
        assert cap.out.splitlines()[0] == "unknown"
        assert cap.err.strip()
    else:
        assert rc in (0, 1)     # settled without any decision


def test_parse_error_exit_three(tmp_path, capsys):
    rc = main(["solve", _file(tmp_path, "(= x y)\n")])
    cap = capsys.readouterr()
    assert rc == 3
    assert "parse error" in cap.err


def test_missing_file_exit_three(tmp_path, capsys):
    rc = main(["solve", str(tmp_path / "absent.fdcc")])
    assert rc == 3
    assert "cannot read" in capsys.readouterr().err


def test_bad_usage_exit_three(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "x", "--solver", "cvc5"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 3


def test_dump_prints_stats_json_to_stderr(tmp_path, capsys):
    rc = main(["solve", _file(tmp_path, SAT), "--dump"])
    cap = capsys.readouterr()
    assert rc == 0
    body = json.loads(cap.err)
    assert body["stats"]["decisions"] >= 0
    assert body["ints"]["x"] == 0


def test_trace_goes_to_file_not_stdout(tmp_path, capsys):
    path = tmp_path / "trace.jsonl"
    rc = main(["solve", _file(tmp_path, GOLDEN_EQ), "--trace", str(path)])
    cap = capsys.readouterr()
    assert rc == 1
    assert cap.out == "unsat\n"
    events = [json.loads(line) for line in path.read_text().splitlines()]
    assert events
    assert events[-1]["ev"] == "verdict"


def test_oracle_subcommand(tmp_path, capsys):
    rc = main(["oracle", _file(tmp_path, SAT)])
    out = capsys.readouterr().out.splitlines()
    assert rc == 0
    assert out[0] == "sat"
    assert out[1].startswith("(model ")

    rc = main(["oracle", _file(tmp_path, "(declare-int x 0 3)\n"
                                         "(distinct x x)\n", "u.fdcc")])
    assert rc == 1
    assert capsys.readouterr().out == "unsat\n"


def test_oracle_cap_gives_unknown(tmp_path, capsys):
    text = "\n".join(f"(declare-int v{k} 0 1000)" for k in range(4)) + "\n"
    rc = main(["oracle", _file(tmp_path, text), "--cap", "100"])
    assert rc == 2
    assert capsys.readouterr().out == "unknown\n"


def test_gen_emits_a_parseable_formula(capsys):
    rc = main(["gen", "--class", "AEUF-I", "--seed", "7", "--length", "9"])
    out = capsys.readouterr().out
    assert rc == 0
    from fdcc import parse
    parse(out)
    body = [l for l in out.splitlines() if not l.startswith("(declare")]
    assert len(body) == 9


def test_gen_seed_falls_back_to_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FDCC_SEED", "41")
    main(["gen", "--length", "8"])
    via_env = capsys.readouterr().out
    monkeypatch.delenv("FDCC_SEED")
    main(["gen", "--length", "8", "--seed", "41"])
    assert capsys.readouterr().out == via_env
    main(["gen", "--length", "8", "--seed", "42"])
    assert capsys.readouterr().out != via_env


def test_gen_writes_to_file(tmp_path, capsys):
    out = tmp_path / "g.fdcc"
    rc = main(["gen", "--seed", "3", "-o", str(out)])
    assert rc == 0
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith("(declare-")


def test_bench_smoke_prints_table_and_csv(tmp_path, capsys):
    csv = tmp_path / "r.csv"
    rc = main(["bench", "--class", "AEUF-I", "--count", "2",
               "--lengths", "4,6", "--num-vars", "5", "--array-size", "4",
               "--dom-hi", "8", "--timeout", "10", "--seed", "0",
               "--out", str(csv)])
    cap = capsys.readouterr()
    assert rc == 0
    assert "solver" in cap.out and "Gain" in cap.out
    assert "WARNING" not in cap.err
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("formula_id,")
    assert lines[1].startswith("# sha256=")
    assert len(lines) == 2 + 2 * 3
