"""Tests for the command-line front end."""

import json

import pytest

from ac_solve import __version__
from ac_solve.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_REJECTED,
    EXIT_SAT,
    EXIT_UNSAT,
    EXIT_USAGE,
    run,
)
from ac_solve.config import THREADS_ENV


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Make sure no thread count leaks in from the environment."""
    monkeypatch.delenv(THREADS_ENV, raising=False)


@pytest.fixture
def write(tmp_path):
    """Write a file into the temporary directory and return its path."""

    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


@pytest.fixture
def even_loop(write):
    """A program with two answer sets."""
    return write("even.acp", "a :- not b.\nb :- not a.\n")


def test_version(capsys):
    """Test the version flag."""
    assert run(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_solve(even_loop, capsys):
    """Test enumerating answer sets as text."""
    assert run(["solve", even_loop]) == EXIT_SAT
    out = capsys.readouterr().out
    assert out.splitlines() == ["Answer: 1", "a", "Answer: 2", "b", "SATISFIABLE", "Models: 2"]


def test_solve_unsatisfiable(write, capsys):
    """Test the exit code of a program without models."""
    path = write("odd.acp", "p :- not p.\n")
    assert run(["solve", path]) == EXIT_UNSAT
    assert "UNSATISFIABLE" in capsys.readouterr().out


def test_solve_json(even_loop, capsys):
    """Test enumerating answer sets as JSON."""
    assert run(["solve", even_loop, "--format", "json", "--max-models", "1"]) == EXIT_SAT
    data = json.loads(capsys.readouterr().out)
    assert data == {"result": "SATISFIABLE", "models": [["a"]]}


def test_solve_with_edb(write, capsys):
    """Test adding facts from a file."""
    program = write("rules.acp", "p(X) :- q(X).\n")
    facts = write("facts.txt", "% facts\nq(1)\nq(2).\n")
    assert run(["solve", program, "--edb", facts]) == EXIT_SAT
    assert "p(1) p(2) q(1) q(2)" in capsys.readouterr().out


def test_check(even_loop, write, capsys):
    """Test checking candidate models."""
    good = write("good.txt", "a\n")
    bad = write("bad.txt", "a\nb\n")
    assert run(["check", even_loop, good]) == EXIT_SAT
    assert capsys.readouterr().out == "EQUILIBRIUM\n"
    assert run(["check", even_loop, bad]) == EXIT_UNSAT
    assert capsys.readouterr().out == "NOT EQUILIBRIUM\n"


def test_analyze(write, capsys):
    """Test the safety report of an unsafe program."""
    path = write("unsafe.acp", "p(X) :- 1 =[bool]{ q(X) }.\n")
    assert run(["analyze", path, "--format", "json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["fragment"] == "unsafe"
    assert data["rules"][0]["safe"] is False


def test_seq(write, capsys):
    """Test the strong-equivalence command."""
    first = write("first.acp", "p.\n")
    second = write("second.acp", "p :- not q.\n")
    assert run(["seq", first, second]) == EXIT_OK
    assert capsys.readouterr().out.startswith("NOT EQUIVALENT\n")
    assert run(["seq", first, first, "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"equivalent": True}


def test_prov(write, capsys):
    """Test provenance over the extended naturals."""
    program = write("bag.dl", "b :- e1, e2.\nb :- e1.\nc :- e2, b.\nc :- c, c.\n")
    labels = write("bag.edb", "e1 = 2\ne2 = 0\n")
    assert run(["prov", program, "--edb", labels, "--max-leaves", "10"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["b = 2 [converged]", "c = 0 [converged]"]


def test_prov_not_converged(write, capsys):
    """Test the exit code when values still grow at the leaf bound."""
    program = write("loop.dl", "p :- e.\np :- p, p.\n")
    labels = write("loop.edb", "e = 1\n")
    assert run(["prov", program, "--edb", labels, "--semiring", "nat", "--max-leaves", "4"]) == EXIT_BUDGET
    assert "[partial]" in capsys.readouterr().out


def test_prov_translate(write, capsys):
    """Test printing the AC-program translation."""
    program = write("bag.dl", "b :- e1.\n")
    assert run(["prov", program, "--translate", "--max-leaves", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "leaf(2)." in out
    assert "p_b(V) :- " in out


def test_ground(write, capsys):
    """Test printing the ground program."""
    path = write("path.acp", "e(a,b).\np(X,Y) :- e(X,Y).\n")
    assert run(["ground", path]) == EXIT_OK
    assert "p(a,b) :- e(a,b)." in capsys.readouterr().out


def test_parse_error(write, capsys):
    """Test reporting a syntax error."""
    path = write("broken.acp", "p :- .\nq :- (.\n")
    assert run(["solve", path]) == EXIT_PARSE
    assert capsys.readouterr().err.startswith("error[parse]:")


def test_rejected_program(write, capsys):
    """Test reporting an unsafe program."""
    path = write("unsafe.acp", "p(X) :- 1 =[bool]{ q(X) }.\n")
    assert run(["solve", path]) == EXIT_REJECTED
    assert capsys.readouterr().err.startswith("error[analysis]:")


def test_missing_file(tmp_path, capsys):
    """Test that a missing input file is a usage error."""
    assert run(["solve", str(tmp_path / "missing.acp")]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error[usage]:")


@pytest.mark.parametrize("argv", [[], ["solve"], ["frobnicate"], ["solve", "x.acp", "--max-models", "0"]])
def test_usage_errors(argv, capsys):
    """Test invalid command lines."""
    assert run(argv) == EXIT_USAGE
    assert "error[usage]:" in capsys.readouterr().err


def test_settings_file(even_loop, write, capsys):
    """Test that a settings file limits the number of models."""
    config = write("ac-solve.yaml", "max_models: 1\n")
    assert run(["solve", even_loop, "--config", config]) == EXIT_SAT
    assert "Models: 1" in capsys.readouterr().out
