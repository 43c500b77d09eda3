"""Source-to-source rewritings of the surface constructs.

Choice constraints, conditionals, disjunctive heads and aggregates are all
expressed with plain algebraic constraints before analysis and grounding.
"""

import logging
import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ac_solve.exceptions import DesugarError
from ac_solve.semiring import BOOL, INT, MAXTROP, NAT, RAT, Infinity, SemiringDef, swap_comparator, to_term
from ac_solve.syntax.ast import (
    Aggregate,
    And,
    Atom,
    Bottom,
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
    Program,
    Rule,
    Sum,
    Times,
    Var,
    WImplies,
    double_negate,
    is_negation,
    negate,
    walk,
)
from ac_solve.syntax.variables import free_vars

logger = logging.getLogger(__name__)

CONDITIONAL_MODES = ("alt", "vc", "df")

_RESERVED = re.compile(r"^_([A-Za-z]+)(\d+)$")


class FreshNames:
    """Generator of program-unique reserved names such as ``_V1`` or ``_avg2``."""

    def __init__(self, program: Optional[Program] = None):
        self._next: Dict[str, int] = {}
        if program is not None:
            for rule in program.rules:
                for node in _rule_walk(rule):
                    if isinstance(node, Var):
                        self._reserve(node.name)
                    elif isinstance(node, Atom):
                        self._reserve(node.predicate)

    def _reserve(self, name: str) -> None:
        match = _RESERVED.match(name)
        if match:
            prefix, number = match.group(1), int(match.group(2))
            self._next[prefix] = max(self._next.get(prefix, 1), number + 1)

    def take(self, prefix: str) -> str:
        number = self._next.get(prefix, 1)
        self._next[prefix] = number + 1
        return f"_{prefix}{number}"

    def var(self, prefix: str = "V") -> Var:
        return Var(self.take(prefix))


def _rule_walk(rule: Rule):
    yield from walk(rule.head)
    for literal in rule.body:
        yield from walk(literal)


def double_negate_atoms(node):
    """α^¬¬: put ¬¬ in front of every atom of a (weighted) formula."""
    if isinstance(node, Atom):
        return double_negate(node)
    if isinstance(node, (Implies, Or, And, WImplies, Plus, Times)):
        return type(node)(double_negate_atoms(node.left), double_negate_atoms(node.right))
    if isinstance(node, (Neg, Inv)):
        return type(node)(double_negate_atoms(node.body))
    if isinstance(node, (Sum, Prod, Exists, ForAll)):
        return type(node)(node.var, double_negate_atoms(node.body))
    if isinstance(node, Embed):
        return Embed(double_negate_atoms(node.formula))
    if isinstance(node, Constraint):
        return Constraint(node.lhs, node.cmp, node.semiring, double_negate_atoms(node.body), node.choice)
    if isinstance(node, Conditional):
        return Conditional(
            double_negate_atoms(node.then),
            double_negate_atoms(node.else_),
            double_negate_atoms(node.condition),
            node.mode,
        )
    return node


def expand_choice(rule: Rule, fresh: Optional[FreshNames] = None) -> Tuple[Rule, Rule]:
    """Expand ``k ∼c_R α ← B`` into ``k ∼_R α ← B`` and ``X =_R α ← X =_R α^¬¬, B``.

    Raises:
        DesugarError: If the head is not a choice constraint or a body
            constraint carries the choice marker.
    """
    head = rule.head
    if not isinstance(head, Constraint) or not head.choice:
        raise DesugarError("expand_choice needs a choice constraint in the head")
    _reject_body_choice(rule)
    fresh = fresh or FreshNames()
    var = fresh.var("V")
    plain = Rule(Constraint(head.lhs, head.cmp, head.semiring, head.body), rule.body)
    companion = Rule(
        Constraint(var, "=", head.semiring, head.body),
        (Constraint(var, "=", head.semiring, double_negate_atoms(head.body)),) + rule.body,
    )
    return plain, companion


def _reject_body_choice(rule: Rule) -> None:
    for literal in rule.body:
        for node in walk(literal):
            if isinstance(node, Constraint) and node.choice:
                raise DesugarError("choice constraints are only allowed in rule heads")


def _one(ring: SemiringDef) -> Const:
    return Const(to_term(ring.one))


def encode_conditional(conditional: Conditional, ring: SemiringDef) -> Tuple[object, Optional[Constraint]]:
    """Weighted encoding of ``(s′ | s″ : φ)`` plus an optional extra body literal.

    alt gives ``s′∗φ + s″∗¬φ``; vc adds the body literal ``1 =[bool]{φ + ¬φ}``;
    df gives ``φ∗s′ + (e⊗ + −φ)∗s″`` and needs additive inverses.

    Raises:
        DesugarError: On an unknown mode or df over a semiring without additive inverses.
    """
    condition = conditional.condition
    then, else_ = conditional.then, conditional.else_
    if conditional.mode in ("alt", "vc"):
        encoded = Plus(Times(then, Embed(condition)), Times(else_, Embed(negate(condition))))
        if conditional.mode == "vc":
            excluded_middle = Constraint(1, "=", BOOL, Plus(Embed(condition), Embed(negate(condition))))
            return encoded, excluded_middle
        return encoded, None
    if conditional.mode == "df":
        if not ring.has_add_inverse:
            raise DesugarError(f"df conditionals need additive inverses, {ring.signature} has none")
        holds = Embed(condition)
        return Plus(Times(holds, then), Times(Plus(_one(ring), Neg(holds)), else_)), None
    raise DesugarError(f"unknown conditional mode {conditional.mode!r}")


def _eliminate_conditionals(node, ring: SemiringDef, extra: List[Constraint]):
    if isinstance(node, Conditional):
        then = _eliminate_conditionals(node.then, ring, extra)
        else_ = _eliminate_conditionals(node.else_, ring, extra)
        encoded, literal = encode_conditional(Conditional(then, else_, node.condition, node.mode), ring)
        if literal is not None and literal not in extra:
            extra.append(literal)
        return encoded
    if isinstance(node, (WImplies, Plus, Times)):
        return type(node)(
            _eliminate_conditionals(node.left, ring, extra), _eliminate_conditionals(node.right, ring, extra)
        )
    if isinstance(node, (Neg, Inv)):
        return type(node)(_eliminate_conditionals(node.body, ring, extra))
    if isinstance(node, (Sum, Prod)):
        return type(node)(node.var, _eliminate_conditionals(node.body, ring, extra))
    return node


def _rewrite_constraints(node, extra: List[Constraint]):
    if isinstance(node, Constraint):
        body = _eliminate_conditionals(node.body, node.semiring, extra)
        return Constraint(node.lhs, node.cmp, node.semiring, body, node.choice)
    if isinstance(node, Implies):
        return Implies(_rewrite_constraints(node.left, extra), _rewrite_constraints(node.right, extra))
    return node


def encode_disjunction(atoms) -> Constraint:
    """``a1 | … | an`` as the head constraint ``1 =[bool]{a1 + … + an}``.

    Raises:
        DesugarError: If ``atoms`` is empty.
    """
    atoms = list(atoms)
    if not atoms:
        raise DesugarError("cannot encode an empty disjunction")
    body = Embed(atoms[0])
    for atom in atoms[1:]:
        body = Plus(body, Embed(atom))
    return Constraint(1, "=", BOOL, body)


def _conjunction(literals) -> object:
    formula = literals[0]
    for literal in literals[1:]:
        formula = And(formula, literal)
    return formula


def _sum_of(parts):
    body = parts[0]
    for part in parts[1:]:
        body = Plus(body, part)
    return body


def _grouped(aggregate: Aggregate, term_node) -> object:
    """Σ over elements grouped by term: ``(cond1 + cond2) ∗ t1 + …``."""
    groups: Dict[object, List] = {}
    for element in aggregate.elements:
        groups.setdefault(element.term, []).append(Embed(_conjunction(element.condition)))
    return _sum_of([Times(_sum_of(conditions), term_node(term)) for term, conditions in groups.items()])


def _term_node(term):
    return term if isinstance(term, Var) else Const(term)


def _negated_bound(bound):
    if isinstance(bound, Infinity):
        return Infinity.NEG if bound is Infinity.POS else Infinity.POS
    if isinstance(bound, (int, Fraction)) and not isinstance(bound, bool):
        return to_term(-Fraction(bound))
    raise DesugarError(f"min aggregate bound must be a number or a variable, not {bound!r}")


def encode_aggregate(
    aggregate: Aggregate, fresh: Optional[FreshNames] = None, rule_vars=frozenset()
) -> Tuple[List, List[Rule]]:
    """Replace an aggregate literal by constraints.

    Args:
        aggregate: The aggregate literal.
        fresh: Generator for auxiliary names (avg only).
        rule_vars: Variables occurring in the rest of the rule.

    Returns:
        The body literals replacing the aggregate and any auxiliary rules.

    Raises:
        DesugarError: On unsupported kinds or mismatched semiring hints.
    """
    kind, ring, cmp, bound = aggregate.kind, aggregate.semiring, aggregate.cmp, aggregate.bound
    flipped = swap_comparator(cmp)
    if kind in ("sum", "count"):
        ring = ring or (INT if kind == "sum" else NAT)
        term_node = _term_node if kind == "sum" else (lambda term: Const(1))
        return [Constraint(bound, flipped, ring, _grouped(aggregate, term_node))], []
    if kind in ("max", "min"):
        if ring is not None and ring != MAXTROP:
            raise DesugarError(f"{kind} aggregates are evaluated over maxtrop, not {ring.signature}")
        if kind == "max":
            return [Constraint(bound, flipped, MAXTROP, _grouped(aggregate, _term_node))], []
        # min X = -max(-X)
        negated = _grouped(aggregate, lambda term: Inv(_term_node(term)))
        if isinstance(bound, Var):
            return [Constraint(0, cmp, MAXTROP, Times(negated, bound))], []
        return [Constraint(_negated_bound(bound), cmp, MAXTROP, negated)], []
    if kind == "avg":
        if ring is not None and ring != RAT:
            raise DesugarError(f"avg aggregates are evaluated over rat, not {ring.signature}")
        element_vars = set()
        for element in aggregate.elements:
            if isinstance(element.term, Var):
                element_vars.add(element.term)
            for condition in element.condition:
                element_vars |= free_vars(condition)
        shared = element_vars & set(rule_vars)
        if shared:
            names = ", ".join(sorted(var.name for var in shared))
            raise DesugarError(f"avg aggregate elements may not share variables with the rule: {names}")
        fresh = fresh or FreshNames()
        predicate = fresh.take("avg")
        total, count = fresh.var("S"), fresh.var("C")
        auxiliary = Rule(
            Atom(predicate, (total, count)),
            (
                Constraint(total, "=", RAT, _grouped(aggregate, _term_node)),
                Constraint(count, "=", RAT, _grouped(aggregate, lambda term: Const(1))),
            ),
        )
        literals = [Atom(predicate, (total, count)), Constraint(bound, flipped, RAT, Times(total, Inv(count)))]
        return literals, [auxiliary]
    raise DesugarError(f"{kind} aggregates are not supported")


def desugar_rule(rule: Rule, fresh: Optional[FreshNames] = None) -> List[Rule]:
    """Rewrite one rule into plain AC-rules; auxiliary rules come last."""
    fresh = fresh or FreshNames()
    _reject_body_choice(rule)
    head = rule.head
    if isinstance(head, Disjunction):
        head = encode_disjunction(head.atoms)
    auxiliary: List[Rule] = []
    body: List = []
    for index, literal in enumerate(rule.body):
        others = [lit for i, lit in enumerate(rule.body) if i != index] + [head]
        rule_vars = set()
        for other in others:
            rule_vars |= {node for node in walk(other) if isinstance(node, Var)}
        if isinstance(literal, Aggregate):
            literals, extra_rules = encode_aggregate(literal, fresh, rule_vars)
            body.extend(literals)
            auxiliary.extend(extra_rules)
        elif is_negation(literal) and isinstance(literal.left, Aggregate):
            literals, extra_rules = encode_aggregate(literal.left, fresh, rule_vars)
            if len(literals) != 1:
                raise DesugarError(f"negated {literal.left.kind} aggregates are not supported")
            body.append(negate(literals[0]))
        else:
            body.append(literal)
    extra: List[Constraint] = []
    head = _rewrite_constraints(head, extra)
    body = [_rewrite_constraints(literal, extra) for literal in body]
    body.extend(literal for literal in extra if literal not in body)
    rewritten = Rule(head, tuple(body))
    if isinstance(head, Constraint) and head.choice:
        rules = list(expand_choice(rewritten, fresh))
    else:
        rules = [rewritten]
    return rules + auxiliary


def needs_desugaring(program: Program) -> bool:
    for rule in program.rules:
        for node in _rule_walk(rule):
            if isinstance(node, (Disjunction, Aggregate, Conditional)):
                return True
            if isinstance(node, Constraint) and node.choice:
                return True
    return False


def desugar_program(program: Program) -> Program:
    """Eliminate every surface construct of a program."""
    fresh = FreshNames(program)
    rules: List[Rule] = []
    for rule in program.rules:
        rules.extend(desugar_rule(rule, fresh))
    logger.debug(f"Desugared {len(program.rules)} rules into {len(rules)}")
    return Program(tuple(rules), program.declared_domain)
