"""Abstract syntax of σ-formulas, weighted formulas, AC-rules and programs.

All nodes are frozen dataclasses so they can be hashed, compared structurally
and shared between threads. Default negation is not a node of its own:
``not φ`` is ``Implies(φ, Bottom())``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, Optional, Tuple, Union

from ac_solve.semiring import SemiringDef, Term


@dataclass(frozen=True, slots=True)
class Var:
    """A first-order variable. Also usable as a weighted formula in value position."""

    name: str

    def __str__(self) -> str:
        return self.name


ArgTerm = Union[Term, Var]


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: Tuple[ArgTerm, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> Tuple[str, int]:
        return (self.predicate, len(self.args))

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(arg, Var) for arg in self.args)


@dataclass(frozen=True, slots=True)
class Bottom:
    pass


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Constraint:
    """Algebraic constraint ``lhs cmp_R body``; ``choice`` marks a head choice constraint."""

    lhs: ArgTerm
    cmp: str
    semiring: SemiringDef
    body: "Weighted"
    choice: bool = False


@dataclass(frozen=True, slots=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True, slots=True)
class ForAll:
    var: Var
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Const:
    value: Term


@dataclass(frozen=True, slots=True)
class Embed:
    """An unweighted formula used as a weight: e⊗ when satisfied, e⊕ otherwise."""

    formula: "Formula"


@dataclass(frozen=True, slots=True)
class WImplies:
    left: "Weighted"
    right: "Weighted"


@dataclass(frozen=True, slots=True)
class Plus:
    left: "Weighted"
    right: "Weighted"


@dataclass(frozen=True, slots=True)
class Times:
    left: "Weighted"
    right: "Weighted"


@dataclass(frozen=True, slots=True)
class Neg:
    body: "Weighted"


@dataclass(frozen=True, slots=True)
class Inv:
    body: "Weighted"


@dataclass(frozen=True, slots=True)
class Sum:
    var: Var
    body: "Weighted"


@dataclass(frozen=True, slots=True)
class Prod:
    var: Var
    body: "Weighted"


@dataclass(frozen=True, slots=True)
class Conditional:
    """Surface conditional ``(then | else : condition)@mode``, removed by desugaring."""

    then: "Weighted"
    else_: "Weighted"
    condition: "Formula"
    mode: str


Formula = Union[Bottom, Atom, Implies, Or, And, Constraint, Exists, ForAll]
Weighted = Union[Const, Var, Embed, WImplies, Plus, Times, Neg, Inv, Sum, Prod, Conditional]

FORMULA_TYPES = (Bottom, Atom, Implies, Or, And, Constraint, Exists, ForAll)
WEIGHTED_TYPES = (Const, Var, Embed, WImplies, Plus, Times, Neg, Inv, Sum, Prod, Conditional)


@dataclass(frozen=True, slots=True)
class Disjunction:
    """Disjunctive rule head ``a1 | ... | an``, removed by desugaring."""

    atoms: Tuple[Atom, ...]


@dataclass(frozen=True, slots=True)
class AggregateElement:
    term: ArgTerm
    condition: Tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Aggregate:
    """Aggregate body literal ``kind[ring]{elements} cmp bound``, removed by desugaring."""

    kind: str
    semiring: Optional[SemiringDef]
    elements: Tuple[AggregateElement, ...]
    cmp: str
    bound: ArgTerm


Head = Union[Atom, Constraint, Disjunction, Bottom]
Literal = Union[Formula, Aggregate]


def negate(formula: Formula) -> Implies:
    """Default negation ``not φ``."""
    return Implies(formula, Bottom())


def is_negation(node) -> bool:
    return isinstance(node, Implies) and isinstance(node.right, Bottom)


def double_negate(formula: Formula) -> Implies:
    return negate(negate(formula))


def is_formula(node) -> bool:
    return isinstance(node, FORMULA_TYPES)


def children(node) -> Tuple:
    """Direct sub-nodes of a formula, weighted formula, head or literal."""
    if isinstance(node, (Implies, Or, And, WImplies, Plus, Times)):
        return (node.left, node.right)
    if isinstance(node, (Neg, Inv)):
        return (node.body,)
    if isinstance(node, (Sum, Prod, Exists, ForAll)):
        return (node.var, node.body)
    if isinstance(node, Embed):
        return (node.formula,)
    if isinstance(node, Constraint):
        return (node.body,) if not isinstance(node.lhs, Var) else (node.lhs, node.body)
    if isinstance(node, Conditional):
        return (node.then, node.else_, node.condition)
    if isinstance(node, Disjunction):
        return node.atoms
    if isinstance(node, Aggregate):
        nested = [node.bound] if isinstance(node.bound, Var) else []
        for element in node.elements:
            if isinstance(element.term, Var):
                nested.append(element.term)
            nested.extend(element.condition)
        return tuple(nested)
    if isinstance(node, Atom):
        return tuple(arg for arg in node.args if isinstance(arg, Var))
    return ()


def walk(node) -> Iterator:
    """Pre-order traversal over a node and all of its descendants."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))


def _outside_vars(node, inside_weighted: bool, found: Dict[Var, bool]) -> None:
    # found maps each variable to True once it is seen outside weighted formulas
    if isinstance(node, Var):
        found[node] = found.get(node, False) or not inside_weighted
        return
    if isinstance(node, Atom):
        for arg in node.args:
            if isinstance(arg, Var):
                found[arg] = found.get(arg, False) or not inside_weighted
        return
    if isinstance(node, Constraint):
        if isinstance(node.lhs, Var):
            found[node.lhs] = found.get(node.lhs, False) or not inside_weighted
        _outside_vars(node.body, True, found)
        return
    if isinstance(node, Aggregate):
        # element terms and conditions end up inside the encoded weighted formula
        if isinstance(node.bound, Var):
            _outside_vars(node.bound, inside_weighted, found)
        for element in node.elements:
            _outside_vars(element.term, True, found)
            for condition in element.condition:
                _outside_vars(condition, True, found)
        return
    for child in children(node):
        _outside_vars(child, inside_weighted, found)


@dataclass(frozen=True)
class Rule:
    """AC-rule ``head :- body``; an integrity constraint has head ``Bottom()``."""

    head: Head
    body: Tuple[Literal, ...] = ()

    @cached_property
    def _classified(self) -> Dict[Var, bool]:
        found: Dict[Var, bool] = {}
        _outside_vars(self.head, False, found)
        for literal in self.body:
            _outside_vars(literal, False, found)
        return found

    @cached_property
    def global_vars(self) -> Tuple[Var, ...]:
        """Variables occurring somewhere outside weighted formulas, in first-occurrence order."""
        return tuple(var for var, outside in self._classified.items() if outside)

    @cached_property
    def local_vars(self) -> Tuple[Var, ...]:
        """Variables occurring only inside weighted formulas."""
        return tuple(var for var, outside in self._classified.items() if not outside)

    @property
    def variables(self) -> Tuple[Var, ...]:
        return tuple(self._classified)

    @property
    def is_ground(self) -> bool:
        return not self._classified


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    declared_domain: FrozenSet[str] = field(default_factory=frozenset)

    @cached_property
    def semirings_used(self) -> FrozenSet[SemiringDef]:
        used = set()
        for rule in self.rules:
            for node in _rule_nodes(rule):
                if isinstance(node, Constraint):
                    used.add(node.semiring)
                elif isinstance(node, Aggregate) and node.semiring is not None:
                    used.add(node.semiring)
        return frozenset(used)

    @cached_property
    def arities(self) -> Dict[str, int]:
        found: Dict[str, int] = {}
        for rule in self.rules:
            for node in _rule_nodes(rule):
                if isinstance(node, Atom):
                    found.setdefault(node.predicate, node.arity)
        return found

    def atoms(self) -> Iterator[Atom]:
        for rule in self.rules:
            for node in _rule_nodes(rule):
                if isinstance(node, Atom):
                    yield node

    def __add__(self, other: "Program") -> "Program":
        return Program(self.rules + other.rules, self.declared_domain | other.declared_domain)


def _rule_nodes(rule: Rule) -> Iterator:
    yield from walk(rule.head)
    for literal in rule.body:
        yield from walk(literal)
