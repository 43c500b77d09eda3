"""Tests for equilibrium-model checking and enumeration."""

import itertools
import random
from functools import reduce

import pytest

from ac_solve.evaluator import sat
from ac_solve.exceptions import AnalysisError, BudgetExceededError, DesugarError, ValueInventionError
from ac_solve.grounder import ground_program
from ac_solve.interpretation import HTInterpretation, World
from ac_solve.models import SolveConfig
from ac_solve.solver import check_equilibrium, complete, forced_atoms, solve
from ac_solve.syntax import And, Atom, Bottom, Disjunction, Implies, Or, parse_program, print_program


def _in_sets(models):
    return {frozenset(atom.args[0] for atom in model if atom.predicate == "in") for model in models}


def _subset_sum(values, lower, upper=None, choice=False):
    marker = "c" if choice else ""
    facts = " ".join(f"s({value})." for value in values)
    text = f"{facts}\n{lower} <={marker}[int]{{ not not s(X) * (s(X) -> in(X)) * X }}.\n"
    if upper is not None:
        text += f"{upper} >={marker}[int]{{ not not s(X) * (s(X) -> in(X)) * X }}.\n"
    return parse_program(text)


def _feasible(values, lower, upper):
    found = []
    for size in range(len(values) + 1):
        for subset in itertools.combinations(values, size):
            total = sum(subset)
            if lower <= total and (upper is None or total <= upper):
                found.append(frozenset(subset))
    return found


def _minimal(sets):
    return {s for s in sets if not any(other < s for other in sets)}


def test_even_loop():
    """Test the two answer sets of an even negative loop."""
    models = solve(parse_program("a :- not b.\nb :- not a."))
    assert models == [frozenset({Atom("a")}), frozenset({Atom("b")})]


def test_odd_loop_has_no_model():
    """Test that ``p :- not p`` has no equilibrium model."""
    assert solve(parse_program("p :- not p.")) == []


def test_positive_loop_is_not_self_supporting():
    """Test that ``p :- p`` does not make p true."""
    assert solve(parse_program("p :- p.")) == [frozenset()]


def test_disjunction_is_minimal():
    """Test that a Boolean head constraint behaves like a disjunction."""
    grounded = ground_program(parse_program("1 =[bool]{ a + b }."))
    assert check_equilibrium(grounded, {Atom("a")})
    assert not check_equilibrium(grounded, {Atom("a"), Atom("b")})
    assert solve(parse_program("a | b.")) == [frozenset({Atom("a")}), frozenset({Atom("b")})]


def test_forced_atoms():
    """Test that facts and their definite consequences are forced."""
    grounded = ground_program(parse_program("a.\nb :- a.\nc :- not d."))
    model = {Atom("a"), Atom("b"), Atom("c")}
    assert forced_atoms(grounded, model) == frozenset(model)


def test_weighted_body_constraint():
    """Test a rule whose body counts atoms."""
    program = parse_program("p(1). p(2). p(3).\nok :- 3 <=[nat]{ p(X) }.\nlow :- 4 <=[nat]{ p(X) }.")
    models = solve(program)
    assert len(models) == 1
    assert Atom("ok") in models[0]
    assert Atom("low") not in models[0]


def test_aggregates_end_to_end():
    """Test sum, max and min aggregates through desugaring."""
    program = parse_program("""
        p(1). p(2). p(3).
        total :- sum{ X : p(X) } >= 6.
        big :- max{ X : p(X) } >= 3.
        small :- min{ X : p(X) } <= 1.
        none :- sum{ X : p(X) } >= 7.
    """)
    models = solve(program)
    assert len(models) == 1
    assert {Atom("total"), Atom("big"), Atom("small")} <= models[0]
    assert Atom("none") not in models[0]


@pytest.mark.parametrize(
    "mode,first,second",
    [("alt", [frozenset({Atom("p")})], []), ("vc", [], [])],
)
def test_conditional_modes_bool(mode, first, second):
    """Test the alt and vc readings of two conditionals over 𝔹."""
    r1 = parse_program(f"p :- 1 =[bool]{{ (1 | 0 : p)@{mode} + 1 }}.")
    r2 = parse_program(f"p :- 1 =[bool]{{ (1 | 1 : p)@{mode} }}.")
    assert solve(r1) == first
    assert solve(r2) == second


def test_conditional_df_mode():
    """Test that df gives both conditionals the model {p}."""
    r1 = parse_program("p :- 1 <=[int]{ (1 | 0 : p)@df + 1 }.")
    r2 = parse_program("p :- 1 =[int]{ (1 | 1 : p)@df }.")
    assert solve(r1) == [frozenset({Atom("p")})]
    assert solve(r2) == [frozenset({Atom("p")})]


def test_conditional_df_needs_inverses():
    """Test that df over 𝔹 is rejected."""
    with pytest.raises(DesugarError):
        solve(parse_program("p :- 1 =[bool]{ (1 | 0 : p)@df }."))


def test_subset_sum():
    """Test the minimal subsets of {1,2,3} summing to 3."""
    models = solve(_subset_sum([1, 2, 3], 3, 3))
    assert _in_sets(models) == {frozenset({3}), frozenset({1, 2})}
    assert _in_sets(models[:1]) == {frozenset({3})}


def test_subset_sum_models_form_an_antichain():
    """Test that no two in-sets are comparable under inclusion."""
    sets = list(_in_sets(solve(_subset_sum([1, 2, 3, 4], 4))))
    for a, b in itertools.permutations(sets, 2):
        assert not a < b


@pytest.mark.parametrize("values,lower,upper", [([1, 2, 3], 3, None), ([-2, 1, 3], 1, 2), ([2, -1, 1], 1, 1)])
def test_subset_sum_against_brute_force(values, lower, upper):
    """Test that minimized constraints give exactly the ⊆-minimal feasible subsets."""
    models = solve(_subset_sum(values, lower, upper))
    assert _in_sets(models) == _minimal(_feasible(values, lower, upper))


def test_choice_subset_sum():
    """Test that choice constraints admit every feasible subset of positive values."""
    models = solve(_subset_sum([1, 2, 3], 3, choice=True))
    assert _in_sets(models) == set(_feasible([1, 2, 3], 3, None))


def test_choice_drops_subsets_with_zero_sum_parts():
    """Test that a feasible subset with a zero-sum part is not a choice model."""
    models = solve(_subset_sum([1, -1, 2], 2, 2, choice=True))
    feasible = _feasible([1, -1, 2], 2, 2)
    assert frozenset({1, -1, 2}) in feasible
    assert _in_sets(models) == {frozenset({2})}


def test_max_models():
    """Test limiting the number of models."""
    models = solve(parse_program("a :- not b.\nb :- not a."), SolveConfig(max_models=1))
    assert models == [frozenset({Atom("a")})]


def test_candidate_budget():
    """Test the limit on candidate atoms."""
    program = parse_program("1 =[bool]{ a + b + c }.")
    with pytest.raises(BudgetExceededError):
        solve(program, SolveConfig(max_candidate_atoms=2))


def test_threads_do_not_change_results():
    """Test that parallel candidate checking gives the same models."""
    program = _subset_sum([1, 2, 3, 4], 5, 5)
    assert solve(program, SolveConfig(threads=4)) == solve(program)


def test_unsafe_program_is_rejected():
    """Test that solving refuses unsafe programs."""
    with pytest.raises(AnalysisError):
        solve(parse_program("p(X) :- 1 =[bool]{ q(X) }."))


def test_value_invention_needs_permission():
    """Test that programs computing new values are only solved on request."""
    program = parse_program("q(1). q(2).\np(Y) :- q(Z1), q(Z2), Y =[rat]{ Z1 * Z2 }.")
    with pytest.raises(ValueInventionError):
        solve(program)
    models = solve(program, allow_general=True)
    assert len(models) == 1
    assert {Atom("p", (1,)), Atom("p", (2,)), Atom("p", (4,))} <= models[0]
    assert Atom("p", (3,)) not in models[0]


def test_complete_derives_lazy_atoms():
    """Test completion of a candidate with lazily computed atoms."""
    program = parse_program("q(2).\np(Y) :- q(Z), Y =[nat]{ Z * Z }.")
    grounded = ground_program(program, allow_value_invention=True)
    assert complete(grounded, {Atom("q", (2,))}) == frozenset({Atom("q", (2,)), Atom("p", (4,))})


def test_edb_facts():
    """Test solving with extra facts."""
    models = solve(parse_program("p(X) :- q(X), not r(X)."), edb=[Atom("q", (1,)), Atom("r", (1,)), Atom("q", (2,))])
    assert models == [frozenset({Atom("q", (1,)), Atom("q", (2,)), Atom("r", (1,)), Atom("p", (2,))})]


ORACLE_ATOMS = ("a", "b", "c", "d")
HEADS = ["{0}", "{0}", "{0} | {1}", "1 <=[nat]{{ {0} + {1} }}", "1 =[bool]{{ {0} * not {1} }}", ""]
LITERALS = ["{0}", "{0}", "not {0}", "not not {0}", "1 <=[nat]{{ {0} + {1} }}", "2 >[nat]{{ {0} + {1} + {2} }}"]


def random_ground_program(rng, rules=4):
    """A ground program over a, b, c and d with random heads and bodies."""
    lines = []
    for _ in range(rng.randint(1, rules)):
        head = rng.choice(HEADS).format(*rng.sample(ORACLE_ATOMS, 3))
        body = [rng.choice(LITERALS).format(*rng.sample(ORACLE_ATOMS, 3)) for _ in range(rng.randint(0, 2))]
        if not head and not body:
            body = [rng.choice(ORACLE_ATOMS)]
        lines.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")
    return parse_program("\n".join(lines))


def _rule_formula(rule):
    head = rule.head
    if isinstance(head, Disjunction):
        head = reduce(Or, head.atoms)
    body = reduce(And, rule.body) if rule.body else Implies(Bottom(), Bottom())
    return Implies(body, head)


def ht_models(program, atoms=ORACLE_ATOMS):
    """Every HT-model (H, T) of a ground program, found by enumeration."""
    formulas = [_rule_formula(rule) for rule in program.rules]
    universe = [Atom(name) for name in atoms]
    subsets = [frozenset(c) for size in range(len(universe) + 1) for c in itertools.combinations(universe, size)]
    return {
        (here, there)
        for there in subsets
        for here in subsets
        if here <= there and all(sat(f, HTInterpretation(here, there), World.H) for f in formulas)
    }


def naive_equilibrium_models(program):
    models = ht_models(program)
    return {
        there
        for here, there in models
        if here == there and not any(t == there and h < there for h, t in models)
    }


def test_enumeration_against_ht_enumeration():
    """Test the solver against a direct enumeration of HT-models on small ground programs."""
    rng = random.Random(20240611)
    for _ in range(200):
        program = random_ground_program(rng)
        assert set(solve(program)) == naive_equilibrium_models(program), print_program(program)


def test_weak_and_strong_modes_agree():
    """Test that both minimality modes give the same models when every value is defined."""
    rng = random.Random(7)
    programs = [random_ground_program(rng) for _ in range(50)]
    programs += [_subset_sum([1, 2, 3], 3, 3), _subset_sum([2, -1, 1], 1, 1, choice=True)]
    for program in programs:
        assert solve(program, SolveConfig(mode="weak")) == solve(program, SolveConfig(mode="strong"))
    lazy = parse_program("q(1). q(2).\np(Y) :- q(Z1), q(Z2), Y =[rat]{ Z1 * Z2 }.")
    assert solve(lazy, SolveConfig(mode="weak"), allow_general=True) == solve(lazy, allow_general=True)
