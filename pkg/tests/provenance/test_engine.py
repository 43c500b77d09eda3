"""Tests for leaf-stratified provenance and the derivation-tree oracle."""

import random

import pytest

from ac_solve.exceptions import BudgetExceededError, ProvenanceError
from ac_solve.provenance import compute_provenance, parse_datalog, provenance_tree_oracle
from ac_solve.provenance.engine import compositions, leaf_splits
from ac_solve.semiring import BOOL, INT, MAXTROP, NAT, NAT_INF, Infinity
from ac_solve.syntax import Atom

B, C, P = Atom("b"), Atom("c"), Atom("p")


@pytest.fixture
def bag_program():
    """A program with two rules for b and a cyclic rule for c."""
    return parse_datalog("""
        b :- e1, e2.
        b :- e1.
        c :- e2, b.
        c :- c, c.
    """)


@pytest.fixture
def loop_program():
    """A program where p has infinitely many derivations."""
    return parse_datalog("p :- e.\np :- p, p.")


def _random_program(rng):
    heads = ["a", "b", "c"]
    atoms = heads + ["e1", "e2"]
    rules = []
    for _ in range(rng.randint(2, 5)):
        body = rng.sample(atoms, rng.randint(1, 2))
        rules.append(f"{rng.choice(heads)} :- {', '.join(body)}.")
    return parse_datalog("\n".join(rules))


def test_compositions():
    """Test splitting a leaf count into positive parts."""
    assert compositions(4, 2) == [(1, 3), (2, 2), (3, 1)]
    assert compositions(2, 3) == []
    assert compositions(3, 1) == [(3,)]


def test_leaf_splits_only_use_known_counts():
    """Test that splits skip leaf counts a body atom does not have."""
    table = {Atom("x"): {1: 1, 3: 1}, Atom("y"): {1: 1}}
    assert list(leaf_splits((Atom("x"), Atom("y")), 4, table)) == [(3, 1)]
    assert list(leaf_splits((Atom("x"), Atom("y")), 3, table)) == []


def test_bag_semantics(bag_program):
    """Test provenance counts over the extended naturals."""
    table = compute_provenance(bag_program, {Atom("e1"): 2, Atom("e2"): 0}, NAT_INF, max_leaves=10)
    assert table.entries == {B: 2, C: 0}
    assert table.converged
    assert table.to_lines() == ["b = 2 [converged]", "c = 0 [converged]"]


def test_boolean_provenance(bag_program):
    """Test that Boolean provenance is derivability from true facts."""
    table = compute_provenance(bag_program, {Atom("e1"): True, Atom("e2"): False}, BOOL, max_leaves=10)
    assert table.value(B) is True
    assert table.value(C) is False


def test_values_by_leaf_count(bag_program):
    """Test the per-leaf-count breakdown."""
    table = compute_provenance(bag_program, {Atom("e1"): 2, Atom("e2"): 3}, NAT, max_leaves=4)
    assert table.by_leaves[B] == {2: 8}
    assert table.by_leaves[C] == {3: 24}


def test_productive_cycle_is_infinite(loop_program):
    """Test that a cycle with non-zero labels yields ∞."""
    table = compute_provenance(loop_program, {Atom("e"): 1}, NAT_INF, max_leaves=6)
    assert table.entries[P] == Infinity.POS
    assert table.status(P) == "infinite"
    assert table.converged


def test_zero_labelled_cycle_is_finite(loop_program):
    """Test that a cycle whose only base case is zero stays finite."""
    table = compute_provenance(loop_program, {Atom("e"): 0}, NAT_INF, max_leaves=6)
    assert table.entries[P] == 0
    assert P not in table.infinite_atoms


def test_growing_values_are_partial(loop_program):
    """Test that a total still changing near the bound is reported as partial."""
    table = compute_provenance(loop_program, {Atom("e"): 1}, NAT, max_leaves=4)
    assert not table.converged
    assert table.partial_atoms == frozenset({P})
    assert table.status(P) == "partial"
    assert table.to_dict()["converged"] is False


def test_max_leaves_must_be_positive(bag_program):
    """Test the lower limit of the leaf bound."""
    with pytest.raises(ProvenanceError):
        compute_provenance(bag_program, {}, NAT, max_leaves=0)


def test_threads_do_not_change_results(bag_program):
    """Test that parallel strata give the same table."""
    edb = {Atom("e1"): 2, Atom("e2"): 3}
    assert compute_provenance(bag_program, edb, NAT, 8, threads=3) == compute_provenance(bag_program, edb, NAT, 8)


def test_tropical_provenance():
    """Test the best derivation over the max-plus semiring."""
    program = parse_datalog("path(X,Y) :- edge(X,Y).\npath(X,Z) :- path(X,Y), edge(Y,Z).")
    edb = {Atom("edge", ("a", "b")): 1, Atom("edge", ("b", "c")): 4, Atom("edge", ("a", "c")): 2}
    table = compute_provenance(program, edb, MAXTROP, max_leaves=6)
    assert table.value(Atom("path", ("a", "c"))) == 5


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("semiring", [NAT, INT, BOOL])
def test_agrees_with_tree_enumeration(seed, semiring):
    """Test the stratified computation against explicit derivation trees."""
    rng = random.Random(seed)
    program = _random_program(rng)
    if semiring == BOOL:
        edb = {Atom("e1"): rng.choice([True, False]), Atom("e2"): rng.choice([True, False])}
    else:
        edb = {Atom("e1"): rng.randint(0, 3), Atom("e2"): rng.randint(-2 if semiring == INT else 0, 3)}
    computed = compute_provenance(program, edb, semiring, max_leaves=6)
    oracle = provenance_tree_oracle(program, edb, semiring, max_leaves=6)
    assert computed.by_leaves == oracle.by_leaves
    assert computed.entries == oracle.entries


def test_oracle_budget(loop_program):
    """Test that tree enumeration stops at its budget."""
    with pytest.raises(BudgetExceededError):
        provenance_tree_oracle(loop_program, {Atom("e"): 1}, NAT, max_leaves=12, budget=50)
