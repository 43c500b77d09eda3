"""Variable bookkeeping: sorts, Σ-closure, substitution and free variables."""

from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

from ac_solve.semiring import SemiringDef
from ac_solve.syntax.ast import (
    Aggregate,
    AggregateElement,
    And,
    Atom,
    Conditional,
    Const,
    Constraint,
    Disjunction,
    Embed,
    Exists,
    ForAll,
    Implies,
    Inv,
    Neg,
    Or,
    Plus,
    Prod,
    Rule,
    Sum,
    Times,
    Var,
    WImplies,
    walk,
)

_BINDERS = (Sum, Prod, Exists, ForAll)


def free_vars(node) -> FrozenSet[Var]:
    """Variables of ``node`` not bound by Σ, Π, ∃ or ∀."""
    if isinstance(node, Var):
        return frozenset((node,))
    if isinstance(node, Atom):
        return frozenset(arg for arg in node.args if isinstance(arg, Var))
    if isinstance(node, _BINDERS):
        return free_vars(node.body) - {node.var}
    if isinstance(node, Constraint):
        lhs = {node.lhs} if isinstance(node.lhs, Var) else set()
        return free_vars(node.body) | lhs
    found: Set[Var] = set()
    for child in _structural_children(node):
        found |= free_vars(child)
    return frozenset(found)


def ordered_vars(node) -> List[Var]:
    """All variables of ``node`` in first-occurrence order."""
    seen: Dict[Var, None] = {}
    for sub in walk(node):
        if isinstance(sub, Var):
            seen.setdefault(sub)
    return list(seen)


def _structural_children(node) -> Tuple:
    if isinstance(node, (Implies, Or, And, WImplies, Plus, Times)):
        return (node.left, node.right)
    if isinstance(node, (Neg, Inv)):
        return (node.body,)
    if isinstance(node, Embed):
        return (node.formula,)
    if isinstance(node, Conditional):
        return (node.then, node.else_, node.condition)
    if isinstance(node, Disjunction):
        return node.atoms
    if isinstance(node, Aggregate):
        parts = [node.bound] if isinstance(node.bound, Var) else []
        for element in node.elements:
            if isinstance(element.term, Var):
                parts.append(element.term)
            parts.extend(element.condition)
        return tuple(parts)
    return ()


def substitute(node, bindings: Mapping[Var, object]):
    """Replace free variables by ground terms.

    In value position a variable becomes ``Const``; inside atoms and constraint
    left-hand sides it becomes the term itself. Variables bound by an enclosing
    quantifier are left alone.
    """
    if not bindings:
        return node
    if isinstance(node, Var):
        return Const(bindings[node]) if node in bindings else node
    if isinstance(node, Atom):
        if node.is_ground:
            return node
        return Atom(node.predicate, tuple(_term(arg, bindings) for arg in node.args))
    if isinstance(node, Const):
        return node
    if isinstance(node, _BINDERS):
        inner = {var: value for var, value in bindings.items() if var != node.var}
        return type(node)(node.var, substitute(node.body, inner))
    if isinstance(node, Constraint):
        return Constraint(
            _term(node.lhs, bindings), node.cmp, node.semiring, substitute(node.body, bindings), node.choice
        )
    if isinstance(node, (Implies, Or, And, WImplies, Plus, Times)):
        return type(node)(substitute(node.left, bindings), substitute(node.right, bindings))
    if isinstance(node, (Neg, Inv)):
        return type(node)(substitute(node.body, bindings))
    if isinstance(node, Embed):
        return Embed(substitute(node.formula, bindings))
    if isinstance(node, Conditional):
        return Conditional(
            substitute(node.then, bindings),
            substitute(node.else_, bindings),
            substitute(node.condition, bindings),
            node.mode,
        )
    if isinstance(node, Disjunction):
        return Disjunction(tuple(substitute(atom, bindings) for atom in node.atoms))
    if isinstance(node, Aggregate):
        return Aggregate(
            node.kind,
            node.semiring,
            tuple(
                AggregateElement(
                    _term(element.term, bindings),
                    tuple(substitute(c, bindings) for c in element.condition),
                )
                for element in node.elements
            ),
            node.cmp,
            _term(node.bound, bindings),
        )
    return node


def _term(term, bindings: Mapping[Var, object]):
    if isinstance(term, Var) and term in bindings:
        return bindings[term]
    return term


def substitute_rule(rule: Rule, bindings: Mapping[Var, object]) -> Rule:
    return Rule(substitute(rule.head, bindings), tuple(substitute(lit, bindings) for lit in rule.body))


def constraints_of(rule: Rule) -> List[Tuple[Constraint, bool]]:
    """Every constraint of a rule paired with whether it sits in the head."""
    found = [(node, True) for node in walk(rule.head) if isinstance(node, Constraint)]
    for literal in rule.body:
        found.extend((node, False) for node in walk(literal) if isinstance(node, Constraint))
    return found


def variable_sorts(rule: Rule) -> Dict[Var, FrozenSet[SemiringDef]]:
    """Semirings whose values each variable stands for.

    A variable has semiring R in its sort when it is the left-hand side of an
    R-constraint or appears in value position inside an R-constraint body.
    Variables that only occur as atom arguments get the empty sort.
    """
    sorts: Dict[Var, Set[SemiringDef]] = {var: set() for var in rule.variables}
    for constraint, _ in constraints_of(rule):
        if isinstance(constraint.lhs, Var):
            sorts.setdefault(constraint.lhs, set()).add(constraint.semiring)
        for node in _value_positions(constraint.body):
            sorts.setdefault(node, set()).add(constraint.semiring)
    return {var: frozenset(rings) for var, rings in sorts.items()}


def _value_positions(node) -> Iterable[Var]:
    if isinstance(node, Var):
        yield node
    elif isinstance(node, (WImplies, Plus, Times)):
        yield from _value_positions(node.left)
        yield from _value_positions(node.right)
    elif isinstance(node, (Neg, Inv, Sum, Prod)):
        yield from _value_positions(node.body)
    elif isinstance(node, Conditional):
        yield from _value_positions(node.then)
        yield from _value_positions(node.else_)


def sort_conflicts(rule: Rule) -> List[str]:
    """Describe variables whose sort mixes numeric and set carriers or two powerset universes."""
    problems = []
    for var, rings in variable_sorts(rule).items():
        if len({ring.value_sort for ring in rings}) > 1:
            names = ", ".join(sorted(ring.signature for ring in rings))
            problems.append(f"variable {var.name} is used as a value of incompatible semirings: {names}")
    return problems


def sigma_close(body, local: Iterable[Var]):
    """Wrap ``body`` in Σ over the given local variables that occur in it."""
    local = set(local)
    present = [var for var in ordered_vars(body) if var in local]
    for var in reversed(present):
        body = Sum(var, body)
    return body


def sigma_closure(rule: Rule) -> Rule:
    """Σ-bind each constraint body over the rule's local variables it mentions.

    Global variables stay free; a locally ground rule is returned unchanged.
    """
    local = frozenset(rule.local_vars)
    if not local:
        return rule

    def close(node):
        if isinstance(node, Constraint):
            return Constraint(node.lhs, node.cmp, node.semiring, sigma_close(node.body, local), node.choice)
        if isinstance(node, Implies):
            return Implies(close(node.left), close(node.right))
        return node

    return Rule(close(rule.head), tuple(close(literal) for literal in rule.body))
