"""Tests for domain independence, safety and value invention checks."""

import random

import pytest

from ac_solve.analysis import (
    check_domain_restricted,
    check_safety,
    check_sdi,
    check_value_invention,
    lazy_variables,
    require_solvable,
    rule_safety,
)
from ac_solve.evaluator import support
from ac_solve.exceptions import AnalysisError, ValueInventionError
from ac_solve.interpretation import HTInterpretation, World
from ac_solve.provenance import parse_datalog, translate_provenance
from ac_solve.semiring import BOOL, MAXTROP, NAT
from ac_solve.syntax import Atom, Const, Embed, Or, Plus, Program, Rule, Times, Var, negate, parse_program

X = Var("X")
Y = Var("Y")

SUBSET_SUM = """
s(1). s(2). s(3).
3 <=[int]{ not not s(X) * (s(X) -> in(X)) * X }.
3 >=[int]{ not not s(X) * (s(X) -> in(X)) * X }.
"""


def _rule(text):
    return parse_program(text).rules[0]


def test_sdi_rejects_negated_atom():
    """Test that ¬q(Y) is not domain independent in Y."""
    assert not check_sdi(negate(Atom("q", (Y,))), [Y])


def test_sdi_accepts_guarded_negation():
    """Test that p(Y) ∗ ¬q(Y) is domain independent in Y."""
    formula = Times(Embed(Atom("p", (Y,))), Embed(negate(Atom("q", (Y,)))))
    assert check_sdi(formula, [Y])


def test_sdi_disjunction_needs_both_sides():
    """Test that both disjuncts must cover the same variables."""
    Z = Var("Z")
    assert check_sdi(Or(Atom("p", (Y,)), Atom("q", (Y,))), [Y])
    assert not check_sdi(Or(Atom("p", (Y,)), Atom("q", (Z,))), [Y, Z])
    assert check_sdi(Plus(Embed(Atom("p", (Y,))), Embed(Atom("q", (Y,)))), [Y])


def test_sdi_value_variable_needs_guard():
    """Test that a bare value variable is not domain independent."""
    assert not check_sdi(Y, [Y])
    assert check_sdi(Times(Embed(Atom("p", (Y,))), Y), [Y])


def test_unsafe_rule_without_binding_atom():
    """Test that a global variable only used inside a constraint is unsafe."""
    violations = rule_safety(_rule("p(X) :- 1 =[bool]{ q(X) }."))
    assert violations
    assert any("X" in violation for violation in violations)


def test_binding_constraint_makes_rule_safe():
    """Test that ``Y = β`` binds a global variable."""
    rule = _rule("loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }.")
    assert rule_safety(rule) == []
    assert lazy_variables(rule) == [Y]


def test_binding_cycle_is_unsafe():
    """Test that two binding constraints cannot bind each other."""
    rule = _rule("p(X) :- X =[nat]{ Y }, Y =[nat]{ X }.")
    assert rule_safety(rule)


def test_unguarded_local_variable_is_unsafe():
    """Test that a constraint over ¬q(X) with local X is unsafe."""
    assert rule_safety(_rule("p :- 0 =[nat]{ not q(X) }."))


def test_domain_restricted_subset_sum_head():
    """Test the guarded head shape ¬¬α ∗ (α → β) ∗ γ."""
    head = parse_program(SUBSET_SUM).rules[3].head
    assert check_domain_restricted(head)


def test_domain_restricted_rejects_bare_product():
    """Test a head constraint without guard structure."""
    head = _rule("10 <=[nat]{ p(X) * q(X) }.").head
    assert not check_domain_restricted(head)


def test_domain_restricted_locally_ground():
    """Test that locally ground head constraints are trivially restricted."""
    head = _rule("1 =[bool]{ a + b }.").head
    assert check_domain_restricted(head)


def test_value_invention():
    """Test detection of a product of bound values."""
    program = parse_program("q(1). q(2).\np(Y) :- q(Z1), q(Z2), Y =[rat]{ Z1 * Z2 }.")
    assert check_value_invention(program)


def test_no_value_invention_for_relational_program():
    """Test a purely relational program."""
    program = parse_program("e(a,b).\np(X,Y) :- e(X,Y).\np(X,Z) :- p(X,Y), e(Y,Z).")
    assert not check_value_invention(program)


def test_copying_a_value_is_not_invention():
    """Test that binding a head variable to an existing value is allowed."""
    program = parse_program("q(3).\np(Y) :- q(Z), Y =[nat]{ Z }.")
    assert not check_value_invention(program)


def test_report_fragments():
    """Test the fragment classification of whole programs."""
    assert check_safety(parse_program("a. b :- a.")).fragment == "ground"
    assert check_safety(parse_program(SUBSET_SUM)).fragment == "safe-decidable"
    general = check_safety(parse_program("loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }."))
    assert general.fragment == "safe-general"
    assert general.value_invention
    assert general.diagnostics
    unsafe = check_safety(parse_program("p(X) :- 1 =[bool]{ q(X) }."))
    assert unsafe.fragment == "unsafe"
    assert not unsafe.finitely_groundable
    assert not unsafe.rules[0].safe


def test_report_text():
    """Test the human-readable report."""
    text = check_safety(parse_program("p(X) :- 1 =[bool]{ q(X) }.")).to_text()
    assert "unsafe" in text


def test_require_solvable():
    """Test rejection of unsafe and safe-general programs."""
    with pytest.raises(AnalysisError):
        require_solvable(check_safety(parse_program("p(X) :- 1 =[bool]{ q(X) }.")))
    general = check_safety(parse_program("loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }."))
    with pytest.raises(ValueInventionError):
        require_solvable(general)
    require_solvable(general, allow_general=True)


def test_example_rules_are_safe():
    """Test that the local and global sum rules are safe."""
    report = check_safety(parse_program("""
        loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }.
        glob_sum(Y) :- glob_weight(W), Y =[rat]{ ind(I) * W }.
    """))
    assert all(rule.safe for rule in report.rules)
    assert report.fragment != "unsafe"


def _strip_derivation_guards(program):
    def guard(node):
        return isinstance(node, Atom) and node.predicate.startswith(("dz_", "di_", "dl_"))

    return Program(
        tuple(
            Rule(rule.head, tuple(literal for literal in rule.body if not guard(literal)))
            for rule in program.rules
            if not guard(rule.head)
        )
    )


def test_provenance_translation_needs_derivation_guards():
    """Test that the translation is only safe with its derivation atoms."""
    rules = parse_datalog("path(X,Y) :- e(X,Y).\npath(X,Z) :- path(X,Y), e(Y,Z).")
    translated = translate_provenance(rules, NAT)
    assert check_safety(translated).fragment != "unsafe"
    assert check_safety(_strip_derivation_guards(translated)).fragment == "unsafe"


def _random_weighted(rng, ring, depth):
    leaves = [
        lambda: Embed(Atom("p", (X,))),
        lambda: Embed(negate(Atom("q", (X,)))),
        lambda: Embed(Atom("r", (X, "a"))),
        lambda: Embed(Atom("p", ("b",))),
        lambda: Const(rng.randint(0, 1 if ring is BOOL else 3)),
    ]
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(leaves)()
    kind = rng.choice((Plus, Times, Times))
    return kind(_random_weighted(rng, ring, depth - 1), _random_weighted(rng, ring, depth - 1))


def test_support_ignores_fresh_constants():
    """Test that domain independent formulas have the same support over a padded domain."""
    rng = random.Random(20240611)
    domain = ["a", "b", "c"]
    padded = domain + ["fresh1", "fresh2", "fresh3"]
    candidates = [Atom(name, (value,)) for name in ("p", "q") for value in domain]
    candidates += [Atom("r", (value, "a")) for value in domain]
    checked = 0
    for _ in range(20_000):
        ring = rng.choice((NAT, BOOL, MAXTROP))
        body = _random_weighted(rng, ring, 3)
        if not check_sdi(body, [X]):
            continue
        there = frozenset(atom for atom in candidates if rng.random() < 0.5)
        here = frozenset(atom for atom in there if rng.random() < 0.5)
        interpretation = HTInterpretation(here, there)
        for world in World:
            assert support(body, X, ring, interpretation, world, domain) == support(
                body, X, ring, interpretation, world, padded
            ), body
        checked += 1
        if checked == 1_000:
            break
    assert checked == 1_000


def test_negated_atom_support_grows_with_the_domain():
    """Test that the support of ¬q(X) picks up every fresh constant."""
    body = Embed(negate(Atom("q", (X,))))
    interpretation = HTInterpretation.classical([Atom("q", ("a",))])
    assert not check_sdi(body, [X])
    assert support(body, X, NAT, interpretation, World.T, ["a", "b"]) == frozenset({"b"})
    assert support(body, X, NAT, interpretation, World.T, ["a", "b", "fresh1"]) == frozenset({"b", "fresh1"})


@pytest.mark.parametrize(
    "text, conflict",
    [
        ("p(X) :- q, r, X =[pset:a,b]{ q }, X =[pset:c,d]{ r }.", True),
        ("p(X) :- q, r, X =[pset:a,b]{ q }, X =[pset:b,a]{ r }.", False),
        ("p(X) :- q, r, X =[nat]{ q }, X =[pset:a,b]{ r }.", True),
    ],
)
def test_powerset_universes_do_not_share_variables(text, conflict):
    """Test that a variable cannot carry sets over two different universes."""
    violations = rule_safety(_rule(text))
    assert any("incompatible semirings" in v for v in violations) == conflict
