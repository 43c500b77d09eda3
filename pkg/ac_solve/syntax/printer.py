"""Pretty-printer producing text that parses back to the same AST."""

from typing import Tuple

from ac_solve.semiring import format_term
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
    Implies,
    Inv,
    Neg,
    Or,
    Plus,
    Program,
    Rule,
    Times,
    Var,
    WImplies,
)

# binding strength, loosest first
IMPLIES, OR, PLUS, TIMES, AND, UNARY, PRIMARY = range(1, 8)


def format_arg(term) -> str:
    if isinstance(term, Var):
        return term.name
    return format_term(term)


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.predicate
    return f"{atom.predicate}({','.join(format_arg(arg) for arg in atom.args)})"


def _wrap(text: str, level: int, required: int) -> str:
    return f"({text})" if level < required else text


def _binary(node, symbol: str, level: int, right_assoc: bool = False) -> Tuple[str, int]:
    left_req, right_req = (level + 1, level) if right_assoc else (level, level + 1)
    left = _node(node.left, left_req)
    right = _node(node.right, right_req)
    return f"{left} {symbol} {right}", level


def _render(node) -> Tuple[str, int]:
    if isinstance(node, Atom):
        return format_atom(node), PRIMARY
    if isinstance(node, Bottom):
        return "bot", PRIMARY
    if isinstance(node, Var):
        return node.name, PRIMARY
    if isinstance(node, Const):
        return format_term(node.value), PRIMARY
    if isinstance(node, Embed):
        return _render(node.formula)
    if isinstance(node, Implies):
        if isinstance(node.right, Bottom):
            return f"not {_node(node.left, UNARY)}", UNARY
        return _binary(node, "->", IMPLIES, right_assoc=True)
    if isinstance(node, WImplies):
        # a bare formula operand would parse back as an unweighted implication
        lifted = isinstance(node.left, Embed) and isinstance(node.right, Embed)
        left = f"[{format_expression(node.left.formula)}]" if lifted else None
        if node.right == Embed(Bottom()):
            return f"not {left or _node(node.left, UNARY)}", UNARY
        if lifted:
            return f"{left} -> {_node(node.right, IMPLIES)}", IMPLIES
        return _binary(node, "->", IMPLIES, right_assoc=True)
    if isinstance(node, Or):
        return _binary(node, "|", OR)
    if isinstance(node, Plus):
        return _binary(node, "+", PLUS)
    if isinstance(node, Times):
        return _binary(node, "*", TIMES)
    if isinstance(node, And):
        return _binary(node, "&", AND)
    if isinstance(node, Neg):
        if isinstance(node.body, Const):
            return f"-({format_term(node.body.value)})", UNARY
        return f"-{_node(node.body, UNARY)}", UNARY
    if isinstance(node, Inv):
        return f"inv({_node(node.body, IMPLIES)})", PRIMARY
    if isinstance(node, Conditional):
        then = _node(node.then, PLUS)
        else_ = _node(node.else_, PLUS)
        condition = _node(node.condition, IMPLIES)
        return f"({then} | {else_} : {condition})@{node.mode}", PRIMARY
    raise ValueError(f"{type(node).__name__} has no concrete syntax")


def _node(node, required: int) -> str:
    text, level = _render(node)
    return _wrap(text, level, required)


def format_expression(node) -> str:
    """Render a formula or weighted formula."""
    return _node(node, IMPLIES)


def format_constraint(constraint: Constraint) -> str:
    choice = "c" if constraint.choice else ""
    return (
        f"{format_arg(constraint.lhs)} {constraint.cmp}{choice}"
        f"[{constraint.semiring.signature}]{{ {format_expression(constraint.body)} }}"
    )


def format_literal(literal) -> str:
    if isinstance(literal, Atom):
        return format_atom(literal)
    if isinstance(literal, Constraint):
        return format_constraint(literal)
    if isinstance(literal, Implies) and isinstance(literal.right, Bottom):
        return f"not {format_literal(literal.left)}"
    if isinstance(literal, Aggregate):
        ring = f"[{literal.semiring.signature}]" if literal.semiring is not None else ""
        elements = "; ".join(
            f"{format_arg(element.term)} : {', '.join(format_literal(c) for c in element.condition)}"
            for element in literal.elements
        )
        return f"{literal.kind}{ring}{{ {elements} }} {literal.cmp} {format_arg(literal.bound)}"
    raise ValueError(f"{type(literal).__name__} cannot be a rule literal")


def format_head(head) -> str:
    if isinstance(head, Disjunction):
        return " | ".join(format_atom(atom) for atom in head.atoms)
    if isinstance(head, Bottom):
        return ""
    return format_literal(head)


def print_rule(rule: Rule) -> str:
    head = format_head(rule.head)
    if not rule.body:
        return f"{head}." if head else ":- ."
    body = ", ".join(format_literal(literal) for literal in rule.body)
    return f"{head} :- {body}." if head else f":- {body}."


def print_program(program: Program) -> str:
    """Render a program, one statement per line."""
    lines = []
    if program.declared_domain:
        lines.append(f"domain {{{','.join(sorted(program.declared_domain))}}}.")
    lines.extend(print_rule(rule) for rule in program.rules)
    return "\n".join(lines) + ("\n" if lines else "")
