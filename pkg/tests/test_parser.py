"""Tests for the program parser."""

from fractions import Fraction

import pytest

from ac_solve.exceptions import ParseError, UnknownSemiringError
from ac_solve.semiring import BOOL, NAT, RAT
from ac_solve.syntax import (
    Aggregate,
    Atom,
    Bottom,
    Conditional,
    Const,
    Constraint,
    Disjunction,
    Embed,
    Implies,
    Inv,
    Plus,
    Times,
    Var,
    WImplies,
    parse_atom,
    parse_atoms,
    parse_program,
)


def test_parse_facts_and_rules():
    """Test parsing a valid program with facts, rules and an integrity constraint."""
    program = parse_program("""
        % graph
        edge(a, b).
        path(X, Y) :- edge(X, Y).
        :- not path(a, b).
    """)

    assert len(program.rules) == 3
    fact, rule, integrity = program.rules
    assert fact.head == Atom("edge", ("a", "b"))
    assert fact.body == ()
    assert rule.body == (Atom("edge", (Var("X"), Var("Y"))),)
    assert integrity.head == Bottom()
    assert integrity.body == (Implies(Atom("path", ("a", "b")), Bottom()),)


def test_parse_weighted_constraint():
    """Test a rational constraint with a variable left-hand side."""
    program = parse_program("loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }.")
    rule = program.rules[0]
    constraint = rule.body[0]

    assert isinstance(constraint, Constraint)
    assert constraint.lhs == Var("Y")
    assert constraint.cmp == "="
    assert constraint.semiring == RAT
    assert not constraint.choice
    assert constraint.body == Times(
        Times(Embed(Atom("ind", (Var("I"),))), Embed(Atom("loc_weight", (Var("I"), Var("W"))))),
        Var("W"),
    )
    assert rule.global_vars == (Var("Y"),)
    assert set(rule.local_vars) == {Var("I"), Var("W")}


def test_parse_choice_head():
    """Test a choice constraint in a rule head."""
    program = parse_program("10 <=c[nat]{ a + b } :- .")
    head = program.rules[0].head

    assert head.choice
    assert head.semiring == NAT
    assert head.lhs == 10
    assert head.body == Plus(Embed(Atom("a")), Embed(Atom("b")))


def test_choice_in_body_is_rejected():
    """Test that choice constraints may only appear in heads."""
    with pytest.raises(ParseError):
        parse_program("p :- 1 <=c[nat]{ a }.")


def test_parse_numbers_in_terms():
    """Test rational and integral arguments."""
    atom = parse_atom("w(a, 4/6, 3, -inf)")
    assert atom.args[1] == Fraction(2, 3)
    assert atom.args[2] == 3


def test_parse_negation_of_weighted_formula():
    """Test that ``not`` over a weighted operand becomes a weighted implication."""
    program = parse_program("p :- 1 <=[nat]{ not (a + b) }.")
    body = program.rules[0].body[0].body
    assert body == WImplies(Plus(Embed(Atom("a")), Embed(Atom("b"))), Embed(Bottom()))


def test_parse_conditional():
    """Test a surface conditional with its mode."""
    program = parse_program("p :- 1 =[bool]{ (1 | 0 : p)@alt + 1 }.")
    body = program.rules[0].body[0].body

    assert isinstance(body, Plus)
    assert body.left == Conditional(Const(1), Const(0), Atom("p"), "alt")
    assert body.right == Const(1)


def test_parse_disjunctive_head():
    """Test a disjunctive head."""
    program = parse_program("a | b :- c.")
    assert program.rules[0].head == Disjunction((Atom("a"), Atom("b")))


def test_parse_aggregate():
    """Test an aggregate literal with two elements."""
    program = parse_program("ok :- sum[int]{ X : p(X); 1 : q } >= 3.")
    aggregate = program.rules[0].body[0]

    assert isinstance(aggregate, Aggregate)
    assert aggregate.kind == "sum"
    assert aggregate.cmp == ">="
    assert aggregate.bound == 3
    assert len(aggregate.elements) == 2
    assert aggregate.elements[0].term == Var("X")
    assert aggregate.elements[1].condition == (Atom("q"),)


def test_domain_declaration():
    """Test that domain declarations are collected and not kept as rules."""
    program = parse_program("domain {a, b}.\np(a).")
    assert program.declared_domain == frozenset({"a", "b"})
    assert len(program.rules) == 1


def test_arity_clash():
    """Test that a predicate may not be used with two arities."""
    with pytest.raises(ParseError) as exc_info:
        parse_program("p(a).\nq :- p(a, b).")
    assert exc_info.value.line == 2


def test_reserved_identifiers():
    """Test that identifiers with a leading underscore are reserved."""
    with pytest.raises(ParseError):
        parse_program("_aux :- p.")
    program = parse_program("_aux :- p.", allow_reserved=True)
    assert program.rules[0].head == Atom("_aux")


@pytest.mark.parametrize("text", ["p :- inv(a).", "p :- a, bot.", "q :- domain(x).", "bot(1) :- a."])
def test_keywords_cannot_name_predicates(text):
    """Test that keywords are never read as predicate names."""
    with pytest.raises(ParseError):
        parse_program(text)


def test_keywords_as_operators():
    """Test that the same words keep their operator meaning inside weighted formulas."""
    body = parse_program("p :- 1 =[rat]{ inv(a + 1) }.").rules[0].body[0].body
    assert body == Inv(Plus(Embed(Atom("a")), Const(1)))


def test_unknown_semiring():
    """Test an unknown ring name."""
    with pytest.raises(UnknownSemiringError):
        parse_program("p :- 1 =[real]{ q }.")


def test_constant_outside_carrier():
    """Test that constants must belong to the constraint's carrier."""
    with pytest.raises(ParseError):
        parse_program("p :- 1 <=[nat]{ -1/2 * q }.")


def test_syntax_error_position():
    """Test that syntax errors carry a line number."""
    with pytest.raises(ParseError) as exc_info:
        parse_program("p.\nq :- r,, s.")
    assert exc_info.value.line == 2


def test_parse_atoms_lines():
    """Test reading ground facts one per line."""
    atoms = parse_atoms(["% facts", "p(1).", "", "q(a,b)"])
    assert atoms == [Atom("p", (1,)), Atom("q", ("a", "b"))]


def test_parse_atoms_rejects_variables():
    """Test that fact files must be ground."""
    with pytest.raises(ParseError) as exc_info:
        parse_atoms(["p(1)", "p(X)"])
    assert exc_info.value.line == 2


def test_bool_constraint_left_hand_side():
    """Test a Boolean constraint over a sum of atoms."""
    program = parse_program("1 =[bool]{ a + b } :- c.")
    head = program.rules[0].head
    assert head.semiring == BOOL
    assert program.rules[0].body == (Atom("c"),)
