import json
import subprocess
import sys

import pytest

from cycletab.cli import main

from conftest import PROGRAMS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.splitlines(), err


def test_run_all(capsys):
    code, out, _ = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "bin(X).", "--all")
    assert code == 0
    assert out == ["X = [0|X].", "X = [1|X].", "false."]


def test_run_max_answers(capsys):
    code, out, _ = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "bin(X).", "--max-answers", "1")
    assert code == 0 and out == ["X = [0|X]."]


def test_run_no_answers(capsys):
    code, out, _ = run(capsys, "run", str(PROGRAMS / "coinduction.pl"), "-q", "L=[a,c|L], p(L).")
    assert code == 0 and out == ["false."]


def test_run_json(capsys):
    code, out, _ = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "bin(X).", "--json", "--all")
    assert code == 0
    docs = [json.loads(line) for line in out]
    assert docs[0]["bindings"][0]["var"] == "X"
    assert docs[-1] == {"status": "false"}
    assert len(docs) == 3


def test_run_truncation(capsys):
    code, out, err = run(capsys, "run", str(PROGRAMS / "plain_member.pl"), "-q",
                         "L=[1,2|L], member(E, L), fail.", "--max-depth", "5000")
    assert code == 2
    assert out == ["truncated."]
    assert "limit" in err


def test_run_errors(capsys, tmp_path):
    code, _, err = run(capsys, "run", str(tmp_path / "missing.pl"), "-q", "x.")
    assert code == 1 and "cannot read" in err
    bad = tmp_path / "bad.pl"
    bad.write_text("p(X :- q.\n")
    code, _, err = run(capsys, "run", str(bad), "-q", "p(1).")
    assert code == 1 and "line 1" in err
    code, _, _ = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "bin(X")
    assert code == 1
    code, _, err = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "nope(X).")
    assert code == 2 and "existence_error" in err
    code, _, err = run(capsys, "run", str(PROGRAMS / "bin.pl"), "-q", "X is Y + 1.")
    assert code == 2


def test_run_canonical_subgoals(capsys, tmp_path):
    prog = tmp_path / "t.pl"
    prog.write_text(":- table(len2/1).\nlen2([_, _|_]).\n")
    code, out, _ = run(capsys, "run", str(prog), "-q", "L=[1,2,1,2|L], len2(L).", "--canonical-subgoals")
    assert code == 0 and out == ["L = [1,2,1,2|L]."]


@pytest.mark.parametrize("literal, text", [
    ("L=[1,2,1,2|L]", "L = [1,2|L]"),
    ("f(a,b)", "f(a,b)"),
    ("F=f(a,f(a,F,b),b)", "F = f(a,F,b)"),
])
def test_canon(capsys, literal, text):
    code, out, _ = run(capsys, "canon", literal)
    assert code == 0 and out == [text]


def test_canon_bad_literal(capsys):
    code, _, _ = run(capsys, "canon", "f(X")
    assert code == 1


def test_bench_json(capsys):
    code, out, _ = run(capsys, "bench", "--mode", "coslg", "--mode", "cosld", "--n", "2", "--json")
    assert code == 0
    rows = [json.loads(line) for line in out]
    assert [r["mode"] for r in rows] == ["coslg", "cosld"]
    assert rows[0]["answers"] == 5 and rows[0]["timeout"] is False
    assert set(rows[0]) >= {"mode", "n", "seconds", "answers", "timeout"}


def test_bench_text_and_bad_n(capsys):
    code, out, _ = run(capsys, "bench", "--mode", "coslg", "--n", "3")
    assert code == 0 and "coslg" in out[0] and "answers=17" in out[0]
    code, _, _ = run(capsys, "bench", "--n", "1")
    assert code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cycletab.cli", "canon", "B=[1,1|B]"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "B = [1|B]"
