"""Tests for datalog programs, edb files and grounding."""

from fractions import Fraction

import pytest

from ac_solve.exceptions import ParseError, ProvenanceError
from ac_solve.provenance import ground_datalog, parse_datalog, parse_edb
from ac_solve.provenance.datalog import TOP_ATOM
from ac_solve.semiring import NAT, RAT
from ac_solve.syntax import Atom


@pytest.fixture
def bag_program():
    """A program with two rules for b and a cyclic rule for c."""
    return parse_datalog("""
        b :- e1, e2.
        b :- e1.
        c :- e2, b.
        c :- c, c.
    """)


def test_predicates(bag_program):
    """Test the split into idb and edb predicates."""
    assert bag_program.idb_predicates == frozenset({("b", 0), ("c", 0)})
    assert bag_program.edb_predicates == frozenset({("e1", 0), ("e2", 0)})


def test_padding(bag_program):
    """Test that single-atom bodies are padded with top."""
    padded = bag_program.padded()
    assert padded[1].body == (Atom("e1"), TOP_ATOM)
    assert padded[0].body == (Atom("e1"), Atom("e2"))


@pytest.mark.parametrize(
    "text",
    [
        "p :- q, not r.",
        "p :- 1 <=[nat]{ q }.",
        "1 =[bool]{ p } :- q.",
        "p(X) :- q.",
        "p :- top.",
    ],
)
def test_rejected_programs(text):
    """Test that only positive safe datalog is accepted."""
    with pytest.raises(ProvenanceError):
        parse_datalog(text)


def test_parse_edb(bag_program):
    """Test reading labelled edb atoms."""
    text = "% labels\ne1 = 2\n\ne2 = 3 % trailing comment\ne1 = 4\n"
    labels = parse_edb(text, NAT, bag_program)
    assert labels == {Atom("e1"): 6, Atom("e2"): 3}


def test_parse_edb_with_arguments():
    """Test atoms with arguments and rational labels."""
    labels = parse_edb("edge(a, 1) = 3/2", RAT)
    assert labels == {Atom("edge", ("a", 1)): Fraction(3, 2)}


def test_parse_edb_malformed_line():
    """Test that a line without a label is reported with its number."""
    with pytest.raises(ParseError) as excinfo:
        parse_edb("e1 = 1\ne2\n", NAT)
    assert excinfo.value.line == 2


def test_parse_edb_rejects_idb_atoms(bag_program):
    """Test that derived predicates cannot be labelled."""
    with pytest.raises(ProvenanceError):
        parse_edb("b = 1", NAT, bag_program)


def test_ground_datalog(bag_program):
    """Test derivable atoms and their rule instances."""
    ground = ground_datalog(bag_program, {Atom("e1"): 2, Atom("e2"): 0})
    assert ground.derived == [Atom("b"), Atom("c")]
    assert ground.leaves == frozenset({Atom("e1"), Atom("e2"), TOP_ATOM})
    assert ground.instances[Atom("b")] == ((Atom("e1"), Atom("e2")), (Atom("e1"), TOP_ATOM))
    assert (Atom("c"), Atom("c")) in ground.instances[Atom("c")]


def test_identical_bodies_from_two_rules_are_kept():
    """Test that each rule contributes its own instance."""
    program = parse_datalog("b :- e1, e2.\nb :- e1, e2.")
    ground = ground_datalog(program, {Atom("e1"): 1, Atom("e2"): 1})
    assert len(ground.instances[Atom("b")]) == 2


def test_ground_datalog_with_variables():
    """Test transitive closure over labelled edges."""
    program = parse_datalog("path(X,Y) :- edge(X,Y).\npath(X,Z) :- path(X,Y), edge(Y,Z).")
    edb = {Atom("edge", ("a", "b")): 1, Atom("edge", ("b", "c")): 1}
    ground = ground_datalog(program, edb)
    assert Atom("path", ("a", "c")) in ground.derived
    assert Atom("path", ("c", "a")) not in ground.atoms


def test_ground_datalog_rejects_idb_labels(bag_program):
    """Test that labels on derived atoms are refused."""
    with pytest.raises(ProvenanceError):
        ground_datalog(bag_program, {Atom("b"): 1})
