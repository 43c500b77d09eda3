"""Concrete syntax for AC-programs, parsed with a lark LALR grammar.

Example::

    loc_sum(Y) :- Y =[rat]{ ind(I) * loc_weight(I,W) * W }.
    10 <=c[nat]{ a + b } :- .
    :- not p.

``not``, ``inv``, ``bot``, ``domain`` and ``inf`` are keywords and cannot name
predicates. Identifiers starting with ``_`` are reserved for generated names.
Inside a weighted formula ``[φ]`` reads the unweighted formula φ as a weight,
so ``[a] -> b`` is a weighted implication while ``a -> b`` is a formula.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from ac_solve.exceptions import ParseError, UnknownSemiringError, ValueParseError
from ac_solve.semiring import SemiringDef, get_semiring, parse_number
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
    is_formula,
    walk,
)

logger = logging.getLogger(__name__)

KEYWORDS = frozenset({"not", "inv", "bot", "domain", "inf"})

GRAMMAR = r"""
    start: statement*
    atom_only: atom

    ?statement: head ":-" body "."          -> rule
              | head "."                    -> fact
              | ":-" body "."               -> integrity
              | "domain" "{" symbols "}" "." -> domain

    symbols: (NAME ("," NAME)*)?

    ?head: atom
         | disjunction
         | constraint
         | "bot"                           -> bot

    disjunction: atom ("|" atom)+

    body: (literal ("," literal)*)?

    ?literal: atom
            | constraint
            | aggregate
            | "not" literal                -> not_literal

    constraint: lhs CMP [CHOICE] "[" RING "]" "{" expr "}"

    ?lhs: VAR                              -> var
        | value

    aggregate: AGG ["[" RING "]"] "{" agg_element (";" agg_element)* "}" CMP lhs
    agg_element: lhs ":" agg_cond ("," agg_cond)*
    ?agg_cond: atom
             | "not" agg_cond              -> not_literal

    ?expr: disj "->" expr                  -> implies
         | disj

    ?disj: disj "|" sum                    -> or_
         | sum

    ?sum: sum "+" prod                     -> plus
        | prod

    ?prod: prod "*" conj                   -> times
         | conj

    ?conj: conj "&" unary                  -> and_
         | unary

    ?unary: "-" unary                      -> neg
          | "not" unary                    -> not_
          | "inv" "(" expr ")"             -> inv
          | primary

    ?primary: atom
            | VAR                          -> var
            | value                        -> const
            | "bot"                        -> bot
            | "(" expr ")"
            | "[" expr "]"                 -> weight
            | "(" expr ":" expr ")" "@" MODE -> conditional

    atom: NAME ("(" term ("," term)* ")")?

    ?term: NAME                            -> symbol
         | VAR                             -> var
         | value

    ?value: NUMBER                         -> number
          | INF                            -> number
          | "{" symbols "}"                -> set_literal

    CMP: /!?(<=|>=|=|<|>)/
    CHOICE.2: /c(?=\[)/
    RING: /[a-z][a-z-]*(:[a-z][A-Za-z0-9_]*(,[a-z][A-Za-z0-9_]*)*)?/
    AGG.2: /(sum|count|max|min|avg|times)(?=\s*[\[{])/
    MODE: /alt|vc|df/
    INF.2: /-?inf(?![A-Za-z0-9_])/
    NUMBER: /-?\d+(\/\d+)?/
    NAME: /_?[a-z][A-Za-z0-9_]*/
    VAR: /_?[A-Z][A-Za-z0-9_]*/
    COMMENT: /%[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_LARK = Lark(
    GRAMMAR,
    start=["start", "atom_only"],
    parser="lalr",
    lexer="contextual",
    propagate_positions=True,
)


@dataclass(frozen=True)
class _Alternatives:
    """``s1 | s2`` over weighted operands; legal only as the head of a conditional."""

    then: object
    else_: object


def _lift(node, meta=None):
    """Embed an unweighted formula so it can take part in weighted operations."""
    if isinstance(node, _Alternatives):
        raise ParseError(
            "'|' between weighted operands is only allowed inside a conditional",
            getattr(meta, "line", None),
            getattr(meta, "column", None),
        )
    return Embed(node) if is_formula(node) else node


@v_args(meta=True, inline=True)
class _ProgramBuilder(Transformer):
    """Turns the lark parse tree into AST nodes, validating as it goes."""

    def __init__(self, allow_reserved: bool = False):
        super().__init__()
        self.allow_reserved = allow_reserved
        self.arities: Dict[str, Tuple[int, int, int]] = {}
        self.declared: set = set()

    def _reserved(self, token: Token) -> None:
        if token.startswith("_") and not self.allow_reserved:
            raise ParseError(
                f"identifiers starting with '_' are reserved: {token}", token.line, token.column
            )

    # terms

    def symbol(self, meta, name):
        self._reserved(name)
        return str(name)

    def var(self, meta, name):
        self._reserved(name)
        return Var(str(name))

    def number(self, meta, token):
        try:
            return parse_number(str(token))
        except ValueParseError as e:
            raise ParseError(str(e), token.line, token.column) from e

    def set_literal(self, meta, symbols):
        return frozenset(symbols)

    def symbols(self, meta, *names):
        for name in names:
            self._reserved(name)
        return [str(name) for name in names]

    def const(self, meta, value):
        return Const(value)

    def atom(self, meta, name, *args):
        self._reserved(name)
        predicate = str(name)
        if predicate in KEYWORDS:
            raise ParseError(f"{predicate} is a keyword and cannot name a predicate", name.line, name.column)
        known = self.arities.get(predicate)
        if known is None:
            self.arities[predicate] = (len(args), name.line, name.column)
        elif known[0] != len(args):
            raise ParseError(
                f"predicate {predicate} used with arity {len(args)}, "
                f"but with arity {known[0]} at line {known[1]}",
                name.line,
                name.column,
            )
        return Atom(predicate, tuple(args))

    # expressions

    def bot(self, meta):
        return Bottom()

    def implies(self, meta, left, right):
        if is_formula(left) and is_formula(right):
            return Implies(left, right)
        return WImplies(_lift(left, meta), _lift(right, meta))

    def or_(self, meta, left, right):
        if is_formula(left) and is_formula(right):
            return Or(left, right)
        return _Alternatives(_lift(left, meta), _lift(right, meta))

    def plus(self, meta, left, right):
        return Plus(_lift(left, meta), _lift(right, meta))

    def times(self, meta, left, right):
        return Times(_lift(left, meta), _lift(right, meta))

    def and_(self, meta, left, right):
        if not (is_formula(left) and is_formula(right)):
            raise ParseError("'&' needs unweighted operands; use '*' for weights", meta.line, meta.column)
        return And(left, right)

    def neg(self, meta, body):
        return Neg(_lift(body, meta))

    def not_(self, meta, body):
        if is_formula(body):
            return Implies(body, Bottom())
        return WImplies(_lift(body, meta), Embed(Bottom()))

    def inv(self, meta, body):
        return Inv(_lift(body, meta))

    def weight(self, meta, body):
        return _lift(body, meta)

    def conditional(self, meta, alternatives, condition, mode):
        if isinstance(alternatives, _Alternatives):
            then, else_ = alternatives.then, alternatives.else_
        elif isinstance(alternatives, Or):
            then, else_ = Embed(alternatives.left), Embed(alternatives.right)
        else:
            raise ParseError("a conditional needs two alternatives 's1 | s2'", meta.line, meta.column)
        if not is_formula(condition):
            raise ParseError("the condition of a conditional must be unweighted", meta.line, meta.column)
        return Conditional(_lift(then), _lift(else_), condition, str(mode))

    # constraints and aggregates

    def _ring(self, token: Token) -> SemiringDef:
        try:
            return get_semiring(str(token))
        except UnknownSemiringError as e:
            raise UnknownSemiringError(str(e), token.line, token.column) from e

    def constraint(self, meta, lhs, cmp, choice, ring, body):
        semiring = self._ring(ring)
        body = _lift(body, meta)
        if not isinstance(lhs, Var) and not semiring.contains(lhs):
            raise ParseError(f"constant outside the carrier of {semiring.signature}", meta.line, meta.column)
        for node in walk(body):
            if isinstance(node, Const) and not semiring.contains(node.value):
                raise ParseError(
                    f"constant outside the carrier of {semiring.signature}", meta.line, meta.column
                )
        return Constraint(lhs, str(cmp), semiring, body, choice is not None)

    def agg_element(self, meta, term, *conditions):
        return AggregateElement(term, tuple(conditions))

    def aggregate(self, meta, kind, ring, *rest):
        *elements, cmp, bound = rest
        semiring = self._ring(ring) if ring is not None else None
        return Aggregate(str(kind), semiring, tuple(elements), str(cmp), bound)

    def not_literal(self, meta, literal):
        return Implies(literal, Bottom())

    # statements

    def body(self, meta, *literals):
        for literal in literals:
            for node in walk(literal):
                if isinstance(node, Constraint) and node.choice:
                    raise ParseError("choice constraints are only allowed in rule heads", meta.line, meta.column)
        return tuple(literals)

    def disjunction(self, meta, *atoms):
        return Disjunction(tuple(atoms))

    def rule(self, meta, head, body):
        return Rule(head, body)

    def fact(self, meta, head):
        return Rule(head, ())

    def integrity(self, meta, body):
        return Rule(Bottom(), body)

    def domain(self, meta, symbols):
        self.declared.update(symbols)
        return None

    def start(self, meta, *statements):
        rules = tuple(statement for statement in statements if statement is not None)
        return Program(rules, frozenset(self.declared))

    def atom_only(self, meta, atom):
        return atom


def _run(text: str, start: str, allow_reserved: bool):
    try:
        tree = _LARK.parse(text, start=start)
        return _ProgramBuilder(allow_reserved).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from e
        raise ParseError(str(e.orig_exc)) from e
    except UnexpectedCharacters as e:
        raise ParseError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column) from e
    except UnexpectedToken as e:
        expected = ", ".join(sorted(e.expected))
        raise ParseError(f"unexpected token {str(e.token)!r}, expected one of: {expected}", e.line, e.column) from e
    except UnexpectedEOF as e:
        raise ParseError("unexpected end of input") from e
    except UnexpectedInput as e:
        raise ParseError(str(e), getattr(e, "line", None), getattr(e, "column", None)) from e


def parse_program(text: str, allow_reserved: bool = False) -> Program:
    """Parse the text of an AC-program.

    Args:
        text: Program source.
        allow_reserved: Accept identifiers starting with ``_``, as produced by
            desugaring and grounding.

    Returns:
        The parsed Program.

    Raises:
        ParseError: On lexical or syntax errors, arity clashes, reserved names
            or choice constraints in rule bodies.
        UnknownSemiringError: If a ring name does not resolve.
    """
    program = _run(text, "start", allow_reserved)
    logger.debug(f"Parsed {len(program.rules)} rules")
    return program


def parse_atom(text: str, allow_reserved: bool = True) -> Atom:
    """Parse a single ground atom such as ``p(a, 3/2)``."""
    atom = _run(text.strip(), "atom_only", allow_reserved)
    if not atom.is_ground:
        raise ParseError(f"atom is not ground: {text.strip()}")
    return atom


def parse_atoms(lines: List[str]) -> List[Atom]:
    """Parse one ground atom per non-blank, non-comment line."""
    atoms = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip().rstrip(".")
        if not stripped or stripped.startswith("%"):
            continue
        try:
            atoms.append(parse_atom(stripped))
        except ParseError as e:
            raise ParseError(f"malformed atom {stripped!r}", number, 1) from e
    return atoms

