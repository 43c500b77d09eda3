"""Static analysis: domain independence, safety, domain restrictedness and value invention.

The verdicts decide which programs the grounder and solver accept. Programs in
the ``safe-decidable`` fragment (safe, no value invention, domain restricted
head constraints) have decidable satisfiability and strong equivalence.
"""

import logging
from typing import FrozenSet, Iterable, List, Optional, Set

from ac_solve.exceptions import AnalysisError, ValueInventionError
from ac_solve.models import AnalysisReport, RuleReport
from ac_solve.semiring import Carrier, SemiringDef
from ac_solve.syntax.ast import (
    And,
    Atom,
    Bottom,
    Const,
    Constraint,
    Disjunction,
    Embed,
    Implies,
    Inv,
    Neg,
    Or,
    Plus,
    Program,
    Rule,
    Sum,
    Times,
    Var,
    WImplies,
    is_negation,
    walk,
)
from ac_solve.syntax.printer import print_rule
from ac_solve.syntax.variables import constraints_of, free_vars, sort_conflicts

logger = logging.getLogger(__name__)

UNDECIDABLE_NOTE = (
    "satisfiability is undecidable for safe programs with value invention or "
    "head constraints that are not domain restricted; solving is refused unless "
    "explicitly allowed"
)


def _tracked(node, tracked: Optional[FrozenSet[Var]]) -> FrozenSet[Var]:
    variables = free_vars(node)
    return variables if tracked is None else variables & tracked


def _double_negated(node):
    """Return φ for ``¬¬φ`` (formula or weighted), else None."""
    if is_negation(node) and is_negation(node.left):
        return node.left.left
    if (
        isinstance(node, WImplies)
        and node.right == Embed(Bottom())
        and isinstance(node.left, WImplies)
        and node.left.right == Embed(Bottom())
    ):
        return node.left.left
    return None


def check_sdi(node, variables: Iterable[Var], tracked: Optional[Iterable[Var]] = None) -> bool:
    """Whether ``node`` is syntactically domain independent w.r.t. ``variables``.

    Args:
        node: A formula or weighted formula.
        variables: The variable set X̄ of the derivation.
        tracked: Variables treated as variables; every other free variable is
            regarded as a constant. Defaults to all free variables of ``node``.

    Returns:
        True iff ``node`` is derivable in the domain-independence grammar with
        respect to exactly ``variables``.
    """
    tracked_set = None if tracked is None else frozenset(tracked)
    return _sdi(node, frozenset(variables), tracked_set)


def _sdi(node, target: FrozenSet[Var], tracked: Optional[FrozenSet[Var]]) -> bool:
    own = _tracked(node, tracked)
    if not own <= target:
        return False
    if isinstance(node, Bottom):
        return True
    if not own and not target:
        return True
    if isinstance(node, Embed):
        return _sdi(node.formula, target, tracked)
    if isinstance(node, Atom):
        return own == target
    if isinstance(node, (Const, Var)):
        return not target
    inner = _double_negated(node)
    if inner is not None:
        return _sdi(inner, target, tracked)
    if isinstance(node, (Or, Plus)):
        return _sdi(node.left, target, tracked) and _sdi(node.right, target, tracked)
    if isinstance(node, (And, Times)):
        return _conjunction(node.left, node.right, target, tracked)
    if isinstance(node, (Neg, Inv)):
        return _sdi(node.body, target, tracked)
    return False


def _conjunction(left, right, target: FrozenSet[Var], tracked) -> bool:
    left_vars = _tracked(left, tracked)
    right_vars = _tracked(right, tracked)
    # left factor guards all of X̄
    if _sdi(left, target, tracked) and right_vars <= target:
        return True
    # split X̄ = Ȳ ∪ Z̄
    for y in {left_vars, target}:
        for z in {right_vars, target}:
            if y | z == target and _sdi(left, y, tracked) and _sdi(right, z, tracked):
                return True
    return False


def _local_set(rule: Rule) -> FrozenSet[Var]:
    return frozenset(rule.local_vars)


def _positive_body(rule: Rule):
    return [literal for literal in rule.body if not is_negation(literal)]


def _binding_constraints(rule: Rule) -> List[Constraint]:
    """Positive body constraints of the form ``X = β``."""
    return [
        literal
        for literal in _positive_body(rule)
        if isinstance(literal, Constraint) and isinstance(literal.lhs, Var) and literal.cmp == "="
    ]


def _body_weighted_vars(rule: Rule) -> Set[Var]:
    found: Set[Var] = set()
    for literal in rule.body:
        for node in walk(literal):
            if isinstance(node, Constraint):
                found |= free_vars(node.body)
    return found


def rule_safety(rule: Rule) -> List[str]:
    """Violations of the safety conditions for one rule, empty when safe."""
    violations = list(sort_conflicts(rule))
    local = _local_set(rule)
    for constraint, _ in constraints_of(rule):
        own = _tracked(constraint.body, local)
        if not _sdi(constraint.body, own, local):
            names = ", ".join(sorted(var.name for var in own)) or "no variables"
            violations.append(f"weighted formula over {names} is not domain independent")
    bound_by_atoms: Set[Var] = set()
    for literal in _positive_body(rule):
        if isinstance(literal, Atom):
            bound_by_atoms.update(arg for arg in literal.args if isinstance(arg, Var))
    weighted = _body_weighted_vars(rule)
    binders = {c.lhs for c in _binding_constraints(rule) if c.lhs not in weighted}
    for var in rule.global_vars:
        if var in bound_by_atoms or var in binders:
            continue
        violations.append(f"global variable {var.name} is not bound by a positive body atom or binding constraint")
    return violations


def lazy_variables(rule: Rule) -> List[Var]:
    """Global variables bound only by a body constraint ``X = β``."""
    bound_by_atoms: Set[Var] = set()
    for literal in _positive_body(rule):
        if isinstance(literal, Atom):
            bound_by_atoms.update(arg for arg in literal.args if isinstance(arg, Var))
    weighted = _body_weighted_vars(rule)
    lazy = []
    for constraint in _binding_constraints(rule):
        var = constraint.lhs
        if var in bound_by_atoms or var in weighted or var in lazy:
            continue
        lazy.append(var)
    return lazy


def _factors(node) -> List:
    factors = []
    while isinstance(node, Times):
        factors.append(node.right)
        node = node.left
    factors.append(node)
    return list(reversed(factors))


def check_domain_restricted(constraint: Constraint, local: Optional[Iterable[Var]] = None) -> bool:
    """Whether a head constraint has the shape ``k ∼ ¬¬α ∗ (α → β) ∗ γ``.

    α and β must be domain independent, β over a subset of α's variables, and
    γ may only mention atoms without local variables. Locally ground
    constraints are trivially domain restricted.
    """
    tracked = frozenset(local) if local is not None else free_vars(constraint.body)
    variables = _tracked(constraint.body, tracked)
    if not variables:
        return True
    factors = _factors(constraint.body)
    if len(factors) < 2:
        return False
    first, second, rest = factors[0], factors[1], factors[2:]
    guarded = _double_negated(first.formula if isinstance(first, Embed) else first)
    if guarded is None:
        return False
    if isinstance(second, Embed) and isinstance(second.formula, Implies) and not is_negation(second.formula):
        premise, conclusion = second.formula.left, second.formula.right
    elif isinstance(second, WImplies):
        premise = second.left.formula if isinstance(second.left, Embed) else second.left
        conclusion = second.right
    else:
        return False
    if premise != guarded:
        return False
    alpha_vars = _tracked(guarded, tracked)
    if alpha_vars != variables or not _sdi(guarded, alpha_vars, tracked):
        return False
    beta_vars = _tracked(conclusion, tracked)
    if not beta_vars <= alpha_vars or not _sdi(conclusion, beta_vars, tracked):
        return False
    for gamma in rest:
        for node in walk(gamma):
            if isinstance(node, Atom) and _tracked(node, tracked):
                return False
    return True


def _bounded_values(node, ring: SemiringDef) -> bool:
    """Whether every value of ``node`` is e⊕, e⊗ or a value already in the domain."""
    if ring.carrier is Carrier.BOOLEAN:
        return True
    if isinstance(node, (Const, Var, Embed, WImplies, Atom, Bottom, Implies, Or, And)):
        return True
    if isinstance(node, Plus) and ring.idempotent_add:
        return _bounded_values(node.left, ring) and _bounded_values(node.right, ring)
    if isinstance(node, Sum) and ring.idempotent_add:
        return _bounded_values(node.body, ring)
    if isinstance(node, Times):
        # e⊗ ⊗ v = v and e⊕ ⊗ v = e⊕
        left_unit = isinstance(node.left, (Embed, WImplies))
        right_unit = isinstance(node.right, (Embed, WImplies))
        if left_unit or right_unit:
            return _bounded_values(node.left, ring) and _bounded_values(node.right, ring)
    return False


def rule_value_invention(rule: Rule) -> bool:
    """Whether a body binding ``X = α`` can put fresh values into a head atom."""
    reach: Set[Var] = set()
    heads = rule.head.atoms if isinstance(rule.head, Disjunction) else (rule.head,)
    for head in heads:
        if isinstance(head, Atom):
            reach.update(arg for arg in head.args if isinstance(arg, Var))
    bindings = _binding_constraints(rule)
    changed = True
    while changed:
        changed = False
        for constraint in bindings:
            if constraint.lhs in reach:
                extra = free_vars(constraint.body) - reach
                if extra:
                    reach |= extra
                    changed = True
    return any(
        constraint.lhs in reach and not _bounded_values(constraint.body, constraint.semiring)
        for constraint in bindings
    )


def check_value_invention(program: Program) -> bool:
    """Whether some rule binds a head variable to a value the domain may not contain."""
    return any(rule_value_invention(rule) for rule in program.rules)


def _rule_text(rule: Rule) -> str:
    try:
        return print_rule(rule)
    except ValueError:
        return repr(rule)


def check_safety(program: Program) -> AnalysisReport:
    """Analyze every rule and classify the program.

    Returns:
        An AnalysisReport; unsafe programs are reported, not rejected.
    """
    reports = []
    for index, rule in enumerate(program.rules):
        local = _local_set(rule)
        violations = rule_safety(rule)
        sdi_flags = [
            _sdi(constraint.body, _tracked(constraint.body, local), local)
            for constraint, _ in constraints_of(rule)
        ]
        head_restricted = None
        if isinstance(rule.head, Constraint):
            head_restricted = check_domain_restricted(rule.head, local)
        reports.append(
            RuleReport(
                index=index,
                text=_rule_text(rule),
                safe=not violations,
                violations=violations,
                formula_sdi=sdi_flags,
                head_domain_restricted=head_restricted,
                value_invention=rule_value_invention(rule),
            )
        )
    value_invention = any(report.value_invention for report in reports)
    diagnostics = []
    if not all(report.safe for report in reports):
        fragment = "unsafe"
        diagnostics.append("unsafe rules cannot be grounded without changing their meaning")
    elif all(rule.is_ground for rule in program.rules):
        fragment = "ground"
    elif value_invention or any(report.head_domain_restricted is False for report in reports):
        fragment = "safe-general"
        diagnostics.append(UNDECIDABLE_NOTE)
    else:
        fragment = "safe-decidable"
    report = AnalysisReport(
        rules=reports,
        value_invention=value_invention,
        finitely_groundable=fragment in ("ground", "safe-decidable"),
        fragment=fragment,
        diagnostics=diagnostics,
    )
    logger.info(f"Analysis: fragment {fragment}, {len(reports)} rules")
    return report


def require_solvable(report: AnalysisReport, allow_general: bool = False) -> None:
    """Reject programs the solver cannot handle.

    Raises:
        AnalysisError: If the program is unsafe.
        ValueInventionError: If the program is safe-general and ``allow_general`` is not set.
    """
    if report.fragment == "unsafe":
        offending = [f"rule {r.index}: {v}" for r in report.rules for v in r.violations]
        raise AnalysisError("program is not safe: " + "; ".join(offending), report)
    if report.fragment == "safe-general" and not allow_general:
        raise ValueInventionError(UNDECIDABLE_NOTE, report)
