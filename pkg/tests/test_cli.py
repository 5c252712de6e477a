import json
import subprocess
import sys

import pytest

import seqmanip as sm
from seqmanip.cli import main
from _util import example1_document


@pytest.fixture
def ex1_path(tmp_path):
    path = tmp_path / "ex1.json"
    path.write_text(example1_document(), encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_example1(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "solve", ex1_path)
    assert code == 0
    payload = json.loads(out)
    assert payload["bundle"] == ["a", "b"]
    assert payload["utility"] == "9"
    assert payload["strategy"] == ["b", "a", "c", "d", "e"]
    assert payload["dp_states"] >= 1


def test_solve_with_check(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "solve", ex1_path, "--check")
    assert code == 0
    payload = json.loads(out)
    assert payload["check"]["agrees"] is True
    assert payload["check"]["utility"] == "9"
    assert payload["check"]["certificate_policy"] == [3, 2, 1, 2, 1]


def test_solve_dump_table(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "solve", ex1_path, "--dump-table")
    assert code == 0
    payload = json.loads(out)
    states = {tuple(row["state"]["last_rank"]) + (row["state"]["x"], row["state"]["y"]) for row in payload["table"]}
    assert (4, 1, 3, 1) in states  # the collision state in the walkthrough
    base = [row for row in payload["table"] if row["pred"] is None]
    assert len(base) == 1 and base[0]["utility"] == "0"


def test_greedy_command(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "greedy", ex1_path)
    assert code == 0
    payload = json.loads(out)
    assert payload["bundle"] == ["a", "e"]
    assert payload["sequence"][0] == {"item": "e", "agent": 1}


def test_truthful_command(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "truthful", ex1_path)
    assert code == 0
    payload = json.loads(out)
    assert payload["bundle"] == ["a", "d"]
    assert payload["utility"] == "7"


def test_oracle_commands(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "oracle", ex1_path, "--method", "choice-tree")
    assert code == 0
    assert json.loads(out)["utility"] == "9"
    code, out, _err = run_cli(capsys, "oracle", ex1_path, "--method", "dominated-greedy")
    assert code == 0
    payload = json.loads(out)
    assert payload["utility"] == "9"
    assert payload["certificate_policy"] == [3, 2, 1, 2, 1]


def test_oracle_budget_exit_code(capsys, ex1_path):
    code, _out, err = run_cli(capsys, "oracle", ex1_path, "--budget", "1")
    assert code == 3
    assert "budget" in err.lower() or "states" in err.lower()


def test_ratio_tightness(capsys):
    code, out, _err = run_cli(capsys, "ratio", "--tightness", "1000")
    assert code == 0
    payload = json.loads(out)
    assert payload["ratio"] == "1001/1999"
    assert payload["truthful"] == "1001/1000"
    assert payload["optimal"] == "1999/1000"
    assert payload["ratio_decimal"] == "0.500750"


def test_ratio_instance_file(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "ratio", ex1_path)
    assert code == 0
    assert json.loads(out)["ratio"] == "7/9"


def test_achievable_command(capsys, ex1_path):
    code, out, _err = run_cli(capsys, "achievable", ex1_path, "--target", "a,b")
    assert code == 0
    assert json.loads(out)["achievable"] is True
    code, out, _err = run_cli(capsys, "achievable", ex1_path, "--target", "b,c")
    assert code == 0
    assert json.loads(out)["achievable"] is False
    code, _out, _err = run_cli(capsys, "achievable", ex1_path, "--target", "a")
    assert code == 1


def test_gen_roundtrip(capsys):
    code, out, err = run_cli(capsys, "gen", "--agents", "3", "--items", "6", "--seed", "7")
    assert code == 0
    inst = sm.parse_instance(out)
    assert inst == sm.generate_random_instance(3, 6, 7)
    assert "seed=7" in err


def test_gen_requires_seed(capsys):
    code, _out, err = run_cli(capsys, "gen", "--agents", "3", "--items", "6")
    assert code == 1
    assert "seed" in err


def test_gen_tightness(capsys):
    code, out, _err = run_cli(capsys, "gen", "--tightness", "5")
    assert code == 0
    assert sm.parse_instance(out) == sm.generate_tightness_instance(5)


def test_gen_to_file(capsys, tmp_path):
    target = tmp_path / "instance.json"
    code, out, _err = run_cli(capsys, "gen", "--seed", "3", "-o", str(target))
    assert code == 0
    assert out == ""
    assert sm.parse_instance(target.read_text(encoding="utf-8")).m == 6


def test_verify_exhaustive_small(capsys):
    code, out, _err = run_cli(
        capsys, "verify", "--agents", "2", "--max-items", "3", "--exhaustive"
    )
    assert code == 0
    payload = json.loads(out)
    # sizes 0..3 with the manipulator ranking fixed: 1 + 2 + 8 + 48
    assert payload["checked"] == 59
    assert payload["ok"] is True
    assert payload["mismatches"] == []


def test_verify_random(capsys):
    code, out, _err = run_cli(
        capsys, "verify", "--agents", "3", "--max-items", "6", "--random", "25", "--seed", "9"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["checked"] == 25
    assert payload["ok"] is True


def test_verify_requires_a_mode(capsys):
    code, _out, err = run_cli(capsys, "verify", "--agents", "2")
    assert code == 1
    assert "nothing to do" in err


def test_bench_csv_schema(capsys):
    code, out, _err = run_cli(
        capsys, "bench", "--sizes", "5,6", "--per-size", "1", "--seed", "2", "--csv", "-"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "seed,n,m,k1,utility_opt,utility_truthful,ratio,dp_states,dp_millis"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "2" and first[2] == "5"


def test_bench_json(capsys):
    code, out, _err = run_cli(capsys, "bench", "--sizes", "5", "--per-size", "2", "--seed", "4")
    assert code == 0
    payload = json.loads(out)
    assert len(payload["rows"]) == 2
    assert {row["seed"] for row in payload["rows"]} == {4, 5}


def test_missing_file_is_invalid_input(capsys):
    code, _out, err = run_cli(capsys, "solve", "/no/such/file.json")
    assert code == 1
    assert "error" in err


def test_malformed_document_is_invalid_input(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    code, _out, _err = run_cli(capsys, "solve", str(path))
    assert code == 1


def test_unknown_arguments_are_invalid_input(capsys):
    code, _out, _err = run_cli(capsys, "solve")
    assert code == 1
    code, _out, _err = run_cli(capsys, "frobnicate")
    assert code == 1


def test_stdin_instance(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(example1_document()))
    code, out, _err = run_cli(capsys, "truthful", "-")
    assert code == 0
    assert json.loads(out)["bundle"] == ["a", "d"]


def test_solve_byte_identical_across_processes(ex1_path):
    runs = [
        subprocess.run(
            [sys.executable, "-m", "seqmanip", "solve", ex1_path, "--dump-table"],
            capture_output=True,
            check=True,
        ).stdout
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    assert json.loads(runs[0])["bundle"] == ["a", "b"]
