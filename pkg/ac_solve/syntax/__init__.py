"""AST, parser, printer and variable bookkeeping for AC-programs."""

from ac_solve.syntax.ast import (
    Aggregate,
    AggregateElement,
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
)
from ac_solve.syntax.parser import parse_atom, parse_atoms, parse_program
from ac_solve.syntax.printer import format_atom, format_expression, print_program, print_rule
from ac_solve.syntax.variables import free_vars, sigma_closure, substitute, variable_sorts

__all__ = [
    'Aggregate',
    'AggregateElement',
    'And',
    'Atom',
    'Bottom',
    'Conditional',
    'Const',
    'Constraint',
    'Disjunction',
    'Embed',
    'Exists',
    'ForAll',
    'Implies',
    'Inv',
    'Neg',
    'Or',
    'Plus',
    'Prod',
    'Program',
    'Rule',
    'Sum',
    'Times',
    'Var',
    'WImplies',
    'double_negate',
    'is_negation',
    'negate',
    'parse_atom',
    'parse_atoms',
    'parse_program',
    'format_atom',
    'format_expression',
    'print_program',
    'print_rule',
    'free_vars',
    'sigma_closure',
    'substitute',
    'variable_sorts',
]
