"""HT satisfaction and the semantics of weighted formulas.

The evaluator works over a fixed :class:`HTInterpretation`. Variables are
resolved through a :class:`RangeEnv`, which carries the current bindings and
the finite (or explicitly unbounded) ranges of Σ/Π-bound variables.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Union

from ac_solve.exceptions import EvaluationError, UndefinedValueError, UnsupportedOperationError
from ac_solve.interpretation import HTInterpretation, World
from ac_solve.semiring import (
    Operation,
    SemiringDef,
    Term,
    Value,
    holds,
    invert,
    term_sort_key,
    to_term,
)
from ac_solve.syntax.ast import (
    And,
    Atom,
    Bottom,
    Conditional,
    Const,
    Constraint,
    Embed,
    Exists,
    ForAll,
    Implies,
    Inv,
    Neg,
    Or,
    Plus,
    Prod,
    Sum,
    Times,
    Var,
    WImplies,
    is_formula,
    is_negation,
)


class _Unbounded:
    """Marker for a variable ranging over an infinite domain."""

    def __repr__(self) -> str:
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()

Range = Union[FrozenSet[Term], _Unbounded]


@dataclass(frozen=True)
class RangeEnv:
    """Variable bindings plus the ranges and sorts of quantified variables."""

    ranges: Mapping[Var, Range] = field(default_factory=dict)
    bindings: Mapping[Var, Term] = field(default_factory=dict)
    sorts: Mapping[Var, FrozenSet[SemiringDef]] = field(default_factory=dict)

    def bind(self, assignment: Mapping[Var, Term]) -> "RangeEnv":
        if not assignment:
            return self
        merged = dict(self.bindings)
        merged.update({var: to_term(value) for var, value in assignment.items()})
        return RangeEnv(self.ranges, merged, self.sorts)

    def admits(self, var: Var, value: Term) -> bool:
        """Whether ``value`` lies in the range and sort of ``var``."""
        if any(not ring.contains(value) for ring in self.sorts.get(var, ())):
            return False
        allowed = self.ranges.get(var, UNBOUNDED)
        return allowed is UNBOUNDED or value in allowed

    def lookup(self, var: Var) -> Term:
        try:
            return self.bindings[var]
        except KeyError:
            raise EvaluationError(f"unbound variable {var.name}") from None


EMPTY_ENV = RangeEnv()


def ground_atom(atom: Atom, env: RangeEnv) -> Atom:
    """Instantiate an atom's variables from the environment's bindings."""
    if atom.is_ground:
        return atom
    return Atom(atom.predicate, tuple(env.lookup(arg) if isinstance(arg, Var) else arg for arg in atom.args))


def guard_atom(body) -> Optional[Atom]:
    """The leftmost ⊗-factor of ``body`` when it is an atom or a doubly negated atom."""
    node = body
    while isinstance(node, Times):
        node = node.left
    if not isinstance(node, Embed):
        return None
    formula = node.formula
    if is_negation(formula) and is_negation(formula.left):
        formula = formula.left.left
    return formula if isinstance(formula, Atom) else None


class Evaluator:
    """Evaluates formulas against one HT-interpretation.

    Results of constraints, sums and products are memoized per node, world
    and bindings for the lifetime of the evaluator.
    """

    def __init__(self, interpretation: HTInterpretation):
        self.interpretation = interpretation
        self._memo: Dict[tuple, tuple] = {}
        self._by_predicate: Dict[tuple, List[Atom]] = {}
        for atom in interpretation.there:
            self._by_predicate.setdefault(atom.signature, []).append(atom)

    def _cached(self, node, key: tuple, compute):
        entry = self._memo.get(key)
        if entry is not None and entry[0] is node:
            return entry[1]
        result = compute()
        self._memo[key] = (node, result)
        return result

    @staticmethod
    def _key(node, world: World, env: RangeEnv, extra=None) -> tuple:
        return (id(node), world, frozenset(env.bindings.items()), extra)

    # satisfaction

    def sat(self, formula, world: World, env: RangeEnv = EMPTY_ENV) -> bool:
        if isinstance(formula, Bottom):
            return False
        if isinstance(formula, Atom):
            return ground_atom(formula, env) in self.interpretation.at(world)
        if isinstance(formula, Implies):
            return all(
                not self.sat(formula.left, later, env) or self.sat(formula.right, later, env)
                for later in world.successors
            )
        if isinstance(formula, Or):
            return self.sat(formula.left, world, env) or self.sat(formula.right, world, env)
        if isinstance(formula, And):
            return self.sat(formula.left, world, env) and self.sat(formula.right, world, env)
        if isinstance(formula, Constraint):
            return self._cached(
                formula, self._key(formula, world, env), lambda: self._constraint(formula, world, env)
            )
        if isinstance(formula, (Exists, ForAll)):
            values = self._finite_range(formula.var, env)
            results = (self.sat(formula.body, world, env.bind({formula.var: v})) for v in values)
            return any(results) if isinstance(formula, Exists) else all(results)
        raise EvaluationError(f"cannot evaluate {type(formula).__name__} as a formula")

    def _constraint(self, constraint: Constraint, world: World, env: RangeEnv) -> bool:
        ring = constraint.semiring
        lhs = env.lookup(constraint.lhs) if isinstance(constraint.lhs, Var) else constraint.lhs
        bound = ring.require(lhs)
        for later in world.successors:
            if not holds(ring, constraint.cmp, bound, self.value(constraint.body, ring, later, env)):
                return False
        return True

    # weighted formulas

    def value(self, node, ring: SemiringDef, world: World, env: RangeEnv = EMPTY_ENV) -> Value:
        if isinstance(node, Const):
            return ring.require(node.value)
        if isinstance(node, Var):
            return ring.require(env.lookup(node))
        if isinstance(node, Embed):
            return ring.one if self.sat(node.formula, world, env) else ring.zero
        if is_formula(node):
            return ring.one if self.sat(node, world, env) else ring.zero
        if isinstance(node, WImplies):
            for later in world.successors:
                if ring.equal(self.value(node.left, ring, later, env), ring.zero):
                    continue
                if ring.equal(self.value(node.right, ring, later, env), ring.zero):
                    return ring.zero
            return ring.one
        if isinstance(node, Plus):
            return ring.add(self.value(node.left, ring, world, env), self.value(node.right, ring, world, env))
        if isinstance(node, Times):
            left = self.value(node.left, ring, world, env)
            if ring.equal(left, ring.zero):
                return ring.zero
            return ring.mul(left, self.value(node.right, ring, world, env))
        if isinstance(node, Neg):
            return invert(ring, Operation.ADD, self.value(node.body, ring, world, env))
        if isinstance(node, Inv):
            return invert(ring, Operation.MUL, self.value(node.body, ring, world, env))
        if isinstance(node, Sum):
            return self._cached(
                node, self._key(node, world, env, ring), lambda: self._sum(node, ring, world, env)
            )
        if isinstance(node, Prod):
            return self._cached(
                node, self._key(node, world, env, ring), lambda: self._prod(node, ring, world, env)
            )
        if isinstance(node, Conditional):
            raise EvaluationError("conditionals must be desugared before evaluation")
        raise EvaluationError(f"cannot evaluate {type(node).__name__} as a weighted formula")

    def _sum(self, node: Sum, ring: SemiringDef, world: World, env: RangeEnv) -> Value:
        variables, body = _unwrap_sums(node)
        total = ring.zero
        for assignment in self.assignments(variables, body, env):
            total = ring.add(total, self.value(body, ring, world, env.bind(assignment)))
        return total

    def _prod(self, node: Prod, ring: SemiringDef, world: World, env: RangeEnv) -> Value:
        if not ring.mul_commutative:
            raise EvaluationError(f"product quantifier needs a commutative ⊗, {ring.signature} is not")
        allowed = env.ranges.get(node.var, UNBOUNDED)
        if allowed is UNBOUNDED:
            guard = guard_atom(node.body)
            if guard is not None and node.var in guard.args:
                # an infinite range always has an element outside the guard's matches
                return ring.zero
            raise UndefinedValueError(f"product over the unbounded range of {node.var.name}")
        total = ring.one
        for value in sorted(allowed, key=term_sort_key):
            if not env.admits(node.var, value):
                continue
            factor = self.value(node.body, ring, world, env.bind({node.var: value}))
            if ring.equal(factor, ring.zero):
                return ring.zero
            total = ring.mul(total, factor)
        return total

    def assignments(self, variables: List[Var], body, env: RangeEnv) -> Iterator[Dict[Var, Term]]:
        """Assignments to Σ-bound variables that can contribute a non-e⊕ summand.

        Variables occurring in the guard atom are bound by matching it against
        the there-world; the rest iterate over their finite ranges.
        """
        guard = guard_atom(body)
        joined = [var for var in variables if guard is not None and var in guard.args]
        rest = [var for var in variables if var not in joined]
        rest_values = []
        for var in rest:
            rest_values.append(self._finite_range(var, env))
        matches = self._match(guard, joined, env) if joined else [{}]
        for match in matches:
            for combo in itertools.product(*rest_values):
                assignment = dict(match)
                assignment.update(zip(rest, combo))
                yield assignment

    def _finite_range(self, var: Var, env: RangeEnv) -> List[Term]:
        if var not in env.ranges:
            raise EvaluationError(f"no range for variable {var.name}")
        allowed = env.ranges[var]
        if allowed is UNBOUNDED:
            raise UndefinedValueError(f"quantifier over the unbounded range of {var.name}")
        return [value for value in sorted(allowed, key=term_sort_key) if env.admits(var, value)]

    def _match(self, guard: Atom, joined: List[Var], env: RangeEnv) -> List[Dict[Var, Term]]:
        targets = set(joined)
        found = {}
        for candidate in self._by_predicate.get(guard.signature, ()):
            assignment: Dict[Var, Term] = {}
            for pattern, actual in zip(guard.args, candidate.args):
                if isinstance(pattern, Var):
                    if pattern in targets:
                        if assignment.setdefault(pattern, actual) != actual:
                            break
                    elif env.lookup(pattern) != actual:
                        break
                elif pattern != actual:
                    break
            else:
                if all(env.admits(var, value) for var, value in assignment.items()):
                    found[tuple(sorted(assignment.items(), key=lambda item: item[0].name))] = assignment
        return [found[key] for key in sorted(found, key=lambda k: [term_sort_key(v) for _, v in k])]

    # atoms a value can depend on

    def mentioned(self, node, env: RangeEnv, out: Set[Atom]) -> None:
        if isinstance(node, Atom):
            out.add(ground_atom(node, env))
        elif isinstance(node, (Implies, Or, And, WImplies, Plus, Times)):
            self.mentioned(node.left, env, out)
            self.mentioned(node.right, env, out)
        elif isinstance(node, (Neg, Inv)):
            self.mentioned(node.body, env, out)
        elif isinstance(node, Embed):
            self.mentioned(node.formula, env, out)
        elif isinstance(node, Constraint):
            self.mentioned(node.body, env, out)
        elif isinstance(node, Sum):
            variables, body = _unwrap_sums(node)
            for assignment in self.assignments(variables, body, env):
                self.mentioned(body, env.bind(assignment), out)
        elif isinstance(node, (Prod, Exists, ForAll)):
            allowed = env.ranges.get(node.var, UNBOUNDED)
            if allowed is UNBOUNDED and isinstance(node, Prod):
                guard = guard_atom(node.body)
                if guard is not None and node.var in guard.args:
                    return
            for value in self._finite_range(node.var, env):
                self.mentioned(node.body, env.bind({node.var: value}), out)


def _unwrap_sums(node: Sum):
    variables = []
    body = node
    while isinstance(body, Sum):
        variables.append(body.var)
        body = body.body
    return variables, body


def sat(formula, interpretation: HTInterpretation, world: World, env: RangeEnv = EMPTY_ENV) -> bool:
    """Decide whether ``(I^H, I^T, world)`` satisfies ``formula``.

    Raises:
        EvaluationError: On unbound variables or missing ranges.
        UndefinedValueError: When a quantifier ranges over an unbounded domain
            and its value is not determined.
    """
    return Evaluator(interpretation).sat(formula, world, env)


def eval_weighted(
    node, ring: SemiringDef, interpretation: HTInterpretation, world: World, env: RangeEnv = EMPTY_ENV
) -> Value:
    """Value of a weighted formula over ``ring`` at the given point."""
    return Evaluator(interpretation).value(node, ring, world, env)


def support(
    node,
    var: Var,
    ring: SemiringDef,
    interpretation: HTInterpretation,
    world: World,
    values,
    which: Operation = Operation.ADD,
    env: RangeEnv = EMPTY_ENV,
) -> FrozenSet[Term]:
    """Elements ξ of ``values`` with ⟦node[var := ξ]⟧ ≠ e⊕ (or e⊗ for ``which=MUL``)."""
    evaluator = Evaluator(interpretation)
    neutral = ring.zero if Operation(which) is Operation.ADD else ring.one
    return frozenset(
        value
        for value in values
        if not ring.equal(evaluator.value(node, ring, world, env.bind({var: value})), neutral)
    )


def mentioned_atoms(node, interpretation: HTInterpretation, env: RangeEnv = EMPTY_ENV) -> FrozenSet[Atom]:
    """Ground atoms whose truth can change the value of ``node`` below ``interpretation``."""
    out: Set[Atom] = set()
    Evaluator(interpretation).mentioned(node, env, out)
    return frozenset(out)


def tau_translate(formula, ring: SemiringDef):
    """Translate an unweighted formula into a weighted one over ``ring``.

    The result evaluates to e⊗ exactly where the formula is satisfied and to e⊕
    elsewhere. Semirings with idempotent addition use the connectives directly;
    otherwise disjunction and existential quantification are expressed through
    additive inverses.

    Raises:
        UnsupportedOperationError: If ``ring`` has neither idempotent addition
            nor additive inverses.
    """
    if not (ring.idempotent_add or ring.has_add_inverse):
        raise UnsupportedOperationError(
            f"cannot express unweighted formulas over {ring.signature}: addition is neither idempotent nor invertible"
        )
    one = Const(to_term(ring.one))
    zero = Const(to_term(ring.zero))

    def complement(node):
        return Plus(one, Neg(node))

    def translate(node):
        if isinstance(node, Bottom):
            return zero
        if isinstance(node, (Atom, Constraint)):
            return Embed(node)
        if isinstance(node, And):
            return Times(translate(node.left), translate(node.right))
        if isinstance(node, Implies):
            return WImplies(translate(node.left), translate(node.right))
        if isinstance(node, Or):
            if ring.idempotent_add:
                return Plus(translate(node.left), translate(node.right))
            return complement(Times(complement(translate(node.left)), complement(translate(node.right))))
        if isinstance(node, ForAll):
            return Prod(node.var, translate(node.body))
        if isinstance(node, Exists):
            if ring.idempotent_add:
                return Sum(node.var, translate(node.body))
            return complement(Prod(node.var, complement(translate(node.body))))
        raise EvaluationError(f"cannot translate {type(node).__name__}")

    return translate(formula)
