import io
import json

import pytest

from mettagraph.cli import SCHEMA, InputError, RunConfig, main, run


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def call_json(capsys, *argv):
    code, out, _ = call(capsys, *argv, "--json")
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA and doc["exit_code"] == code
    return code, doc


def test_full_eval_worked_example(capsys):
    code, doc = call_json(capsys, "run", "--mode", "full-eval", "sample(thunk(random[0.3](v1,v2)))")
    assert code == 0
    assert doc["distribution"] == {"v1": 0.3, "v2": 0.7}
    assert doc["engine_agrees"] is True


def test_full_eval_distribution_is_sorted(capsys):
    code, doc = call_json(capsys, "full-eval", "random[0.5](v2, v1)")
    assert list(doc["distribution"]) == ["v1", "v2"]


def test_demo_minisys_through_run(capsys):
    code, out, _ = call(capsys, "run", "--mode", "bisim", "--demo", "minisys")
    assert code == 0 and "Bisimilar" in out


def test_demo_subcommand(capsys, tmp_path):
    prefix = str(tmp_path / "mini")
    code, doc = call_json(capsys, "demo", "minisys", "--emit-dot", prefix)
    assert code == 0 and doc["verdict"] == "Bisimilar"
    assert doc["relation_size"] > 0 and doc["violations"] == []
    assert (tmp_path / "mini.str1.dot").read_text().startswith("digraph")
    assert (tmp_path / "mini.str2.dot").exists()


def test_mutated_demo_exits_one(capsys):
    code, doc = call_json(capsys, "demo", "minisys", "--mutated")
    assert code == 1 and doc["verdict"] == "Distinguished"


def test_eval_normal_form_echoes_input(capsys):
    code, doc = call_json(capsys, "run", "--mode", "eval", "--lang", "atoms", "(: a A)\n(! a)")
    assert code == 0 and doc["steps"] == 0
    code, out, _ = call(capsys, "eval", "--lang", "stlc", "a")
    assert code == 0 and out.strip().startswith("a")


def test_eval_stlc_term(capsys):
    code, doc = call_json(capsys, "eval", "--lang", "stlc", r"(\x:A. x) a")
    assert code == 0 and doc["normal_forms"] == ["a"]


def test_eval_object_reducer(capsys):
    code, doc = call_json(capsys, "eval", "--lang", "untyped", "--object", r"(\x. \y. x) a b")
    assert code == 0 and doc["normal_forms"] == ["a"]


def test_budget_exhaustion_exits_two(capsys):
    code, doc = call_json(capsys, "eval", "--lang", "untyped", "--budget", "50", r"(\z. z z) (\z. z z)")
    assert code == 2 and doc["status"] == "budget-exhausted"


def test_typecheck_results(capsys):
    code, doc = call_json(capsys, "typecheck", "--lang", "stlc", "--ctx", "a:A", r"(\x:A. x) a")
    assert code == 0 and doc["type"] == "A"
    code, doc = call_json(capsys, "typecheck", "--lang", "stlc", "--ctx", "b:B", r"(\x:A. x) b")
    assert code == 1 and doc["error_kind"] == "TypeMismatch"


def test_typecheck_with_pts_spec(capsys, tmp_path):
    spec = tmp_path / "quine.pts"
    spec.write_text("sort s1\n(s1 : s1)\n(s1, s1, s1)\n")
    code, doc = call_json(capsys, "typecheck", "--lang", "pts", "--pts-spec", str(spec), "s1")
    assert code == 0 and doc["type"] == "s1"


def test_sample_is_seeded(capsys):
    argv = ("sample", "--runs", "200", "--seed", "3", "random[0.3](v1, v2)")
    _, first = call_json(capsys, *argv)
    _, second = call_json(capsys, *argv)
    assert first["counts"] == second["counts"]
    assert sum(first["counts"].values()) == 200


def test_encode_lists_atoms(capsys, tmp_path):
    dot = tmp_path / "space.dot"
    code, doc = call_json(capsys, "encode", "--lang", "stlc", "--emit-dot", str(dot), r"(\x:A. x) a")
    assert code == 0 and doc["violations"] == []
    assert doc["atoms"][-1].startswith("(! (@")
    assert "penwidth=3" in dot.read_text()


def test_bisim_term_and_dot(capsys, tmp_path):
    prefix = str(tmp_path / "t")
    code, doc = call_json(capsys, "bisim", "--lang", "stlc", "--emit-dot", prefix, r"(\x:A. g x) a")
    assert code == 0 and doc["verdict"] == "Bisimilar"
    assert (tmp_path / "t.object.dot").exists() and (tmp_path / "t.atomspace.dot").exists()


def test_bisim_json_files(capsys, tmp_path):
    def write(name, trans):
        p = tmp_path / name
        p.write_text(json.dumps({"initial": 0, "transitions": [
            {"from": a, "action": x, "to": b} for a, x, b in trans]}))
        return str(p)
    left = write("l.json", [(0, "a", 1), (1, "b", 2), (1, "c", 3)])
    right = write("r.json", [(0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "c", 4)])
    code, doc = call_json(capsys, "bisim", left, right)
    assert code == 1 and doc["verdict"] == "Distinguished" and doc["depth"] == 2
    code, doc = call_json(capsys, "bisim", left, left)
    assert code == 0


def test_stdin_and_file_input(capsys, monkeypatch, tmp_path):
    io_text = "(: a A)\n(! a)"
    monkeypatch.setattr("sys.stdin", io.StringIO(io_text))
    code, _, _ = call(capsys, "eval", "--lang", "atoms")
    assert code == 0
    src = tmp_path / "prog.metta"
    src.write_text(io_text)
    code, _, _ = call(capsys, "eval", "--lang", "atoms", "-f", str(src))
    assert code == 0


def test_input_errors_exit_three(capsys, tmp_path):
    code, out, err = call(capsys, "eval", "--lang", "atoms", "(: f")
    assert code == 3 and "expected" in err
    code, _, err = call(capsys, "eval", "-f", str(tmp_path / "missing"))
    assert code == 3
    code, doc = call_json(capsys, "eval", "--budget", "0", "a")
    assert code == 3 and doc["status"] == "input-error"
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 3


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("eval", budget=0)
    with pytest.raises(InputError):
        RunConfig("dance")
    with pytest.raises(InputError):
        run(RunConfig("eval"), ["a", "b"])


def test_trace_file(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, _, _ = call(capsys, "eval", "--lang", "stlc", "--trace", str(trace), r"(\x:A. x) a")
    rows = [json.loads(x) for x in trace.read_text().splitlines()]
    assert code == 0 and rows and all("rule" in r for r in rows)
