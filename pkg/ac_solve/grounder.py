"""Grounding over a finite domain.

Rules are kept as Σ-closed templates. Global variables bound by positive body
atoms are instantiated by joining those atoms against an atom set; global
variables bound only by a body constraint ``X = β`` are resolved lazily
against the interpretation under consideration. Local variables stay
Σ-bound and range over the domain extended by the arguments of the
interpretation's atoms.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from ac_solve.analysis import UNDECIDABLE_NOTE, check_value_invention, lazy_variables, rule_safety
from ac_solve.desugar import desugar_program, needs_desugaring
from ac_solve.evaluator import Evaluator, RangeEnv, guard_atom
from ac_solve.exceptions import BudgetExceededError, EvaluationError, GroundingError, SemiringError
from ac_solve.interpretation import HTInterpretation, World, sort_atoms
from ac_solve.semiring import SemiringDef, Term, term_sort_key, to_term
from ac_solve.syntax.ast import (
    And,
    Atom,
    Bottom,
    Const,
    Constraint,
    Implies,
    Program,
    Prod,
    Rule,
    Sum,
    Var,
    walk,
)
from ac_solve.syntax.variables import free_vars, sigma_closure, substitute_rule, variable_sorts

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**6

TOP = Implies(Bottom(), Bottom())

Binding = Dict[Var, Term]


@dataclass(frozen=True)
class Domain:
    """Finite grounding domain: constant symbols plus semiring values."""

    symbols: FrozenSet[str] = frozenset()
    values: FrozenSet[Term] = frozenset()

    @property
    def terms(self) -> FrozenSet[Term]:
        return self.symbols | self.values

    def carrier(self, semiring: SemiringDef) -> FrozenSet[Term]:
        """Domain values lying in the carrier of ``semiring``."""
        return frozenset(value for value in self.values if semiring.contains(value))

    def extended(self, terms: Iterable[Term]) -> "Domain":
        symbols, values = set(self.symbols), set(self.values)
        for term in terms:
            _classify(term, symbols, values)
        return Domain(frozenset(symbols), frozenset(values))

    def sorted_terms(self) -> List[Term]:
        return sorted(self.terms, key=term_sort_key)


def _classify(term, symbols: Set[str], values: Set[Term]) -> None:
    if isinstance(term, str):
        symbols.add(term)
    else:
        values.add(to_term(term))


def herbrand_domain(program: Program, edb: Iterable[Atom] = ()) -> Domain:
    """Constant symbols and semiring values occurring in ``program`` and ``edb``.

    The identities e⊕ and e⊗ of every semiring the program uses are included,
    as are the symbols of a ``domain`` declaration.
    """
    symbols: Set[str] = set(program.declared_domain)
    values: Set[Term] = set()
    for rule in program.rules:
        for literal in (rule.head,) + rule.body:
            for node in walk(literal):
                if isinstance(node, Atom):
                    for arg in node.args:
                        if not isinstance(arg, Var):
                            _classify(arg, symbols, values)
                elif isinstance(node, Const):
                    _classify(node.value, symbols, values)
                elif isinstance(node, Constraint) and not isinstance(node.lhs, Var):
                    _classify(node.lhs, symbols, values)
    for atom in edb:
        for arg in atom.args:
            _classify(arg, symbols, values)
    for ring in program.semirings_used:
        values.add(to_term(ring.zero))
        values.add(to_term(ring.one))
    return Domain(frozenset(symbols), frozenset(values))


def index_atoms(atoms: Iterable[Atom]) -> Dict[Tuple[str, int], List[Atom]]:
    index: Dict[Tuple[str, int], List[Atom]] = {}
    for atom in sort_atoms(atoms):
        index.setdefault(atom.signature, []).append(atom)
    return index


def _args(atoms: Iterable[Atom]) -> Set[Term]:
    return {arg for atom in atoms for arg in atom.args}


def _unify(pattern: Atom, actual: Atom, binding: Binding) -> Optional[Binding]:
    extended = dict(binding)
    for arg, value in zip(pattern.args, actual.args):
        if isinstance(arg, Var):
            bound = extended.setdefault(arg, value)
            if bound != value:
                return None
        elif arg != value:
            return None
    return extended


def join(patterns: Sequence[Atom], index: Mapping[Tuple[str, int], List[Atom]], binding=None) -> Iterator[Binding]:
    """Bindings that map every pattern onto an indexed atom."""
    binding = binding or {}
    if not patterns:
        yield dict(binding)
        return
    first, rest = patterns[0], patterns[1:]
    for candidate in index.get(first.signature, ()):
        extended = _unify(first, candidate, binding)
        if extended is not None:
            yield from join(rest, index, extended)


def instantiate(atom: Atom, binding: Mapping[Var, Term]) -> Optional[Atom]:
    """Ground ``atom`` under ``binding``; None if a variable stays unbound."""
    args = []
    for arg in atom.args:
        if isinstance(arg, Var):
            if arg not in binding:
                return None
            args.append(binding[arg])
        else:
            args.append(arg)
    return Atom(atom.predicate, tuple(args))


def _conjunction(literals) -> object:
    if not literals:
        return TOP
    formula = literals[0]
    for literal in literals[1:]:
        formula = And(formula, literal)
    return formula


@dataclass(frozen=True, eq=False)
class RuleTemplate:
    """A Σ-closed rule together with the data needed to instantiate it."""

    index: int
    source: Rule
    closed: Rule
    positive: Tuple[Atom, ...]
    lazy: Tuple[Tuple[Var, Constraint], ...]
    free_globals: Tuple[Var, ...]
    sorts: Mapping[Var, FrozenSet[SemiringDef]]
    deferred: bool = False

    @cached_property
    def formula(self):
        """The rule as the σ-formula ``body → head``."""
        return Implies(self.body, self.closed.head)

    @cached_property
    def body(self):
        return _conjunction(self.closed.body)

    @property
    def head_atom(self) -> Optional[Atom]:
        return self.closed.head if isinstance(self.closed.head, Atom) else None

    def admits(self, var: Var, term: Term) -> bool:
        return all(ring.contains(term) for ring in self.sorts.get(var, ()))


def _ordered_lazy(index: int, rule: Rule, closed: Rule) -> Tuple[Tuple[Var, Constraint], ...]:
    lazy = lazy_variables(rule)
    if not lazy:
        return ()
    constraints: Dict[Var, Constraint] = {}
    for source_literal, closed_literal in zip(rule.body, closed.body):
        if isinstance(source_literal, Constraint) and source_literal.lhs in lazy:
            constraints.setdefault(source_literal.lhs, closed_literal)
    graph = nx.DiGraph()
    graph.add_nodes_from(var.name for var in lazy)
    for var in lazy:
        for other in free_vars(constraints[var].body):
            if other in constraints and other != var:
                graph.add_edge(other.name, var.name)
    try:
        order = list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible as e:
        raise GroundingError(f"rule {index}: lazily bound variables depend on each other cyclically") from e
    by_name = {var.name: var for var in lazy}
    return tuple((by_name[name], constraints[by_name[name]]) for name in order)


def make_template(index: int, rule: Rule) -> RuleTemplate:
    closed = sigma_closure(rule)
    positive = tuple(literal for literal in rule.body if isinstance(literal, Atom))
    lazy = _ordered_lazy(index, rule, closed)
    lazy_vars = {var for var, _ in lazy}
    atom_bound = {arg for atom in positive for arg in atom.args if isinstance(arg, Var)}
    free_globals = tuple(var for var in rule.global_vars if var not in atom_bound and var not in lazy_vars)
    return RuleTemplate(
        index=index,
        source=rule,
        closed=closed,
        positive=positive,
        lazy=lazy,
        free_globals=free_globals,
        sorts=variable_sorts(rule),
    )


def walk_rule(rule: Rule) -> Iterator:
    yield from walk(rule.head)
    for literal in rule.body:
        yield from walk(literal)


def _head_predicates(rule: Rule) -> List[Tuple[str, int]]:
    return [node.signature for node in walk(rule.head) if isinstance(node, Atom)]


def lazy_predicate_graph(templates: Sequence[RuleTemplate]) -> Tuple[nx.DiGraph, FrozenSet[Tuple[str, int]]]:
    """Predicate dependency graph and the predicates holding lazily computed values.

    A predicate is lazy when some rule puts a lazily bound variable into one of
    its atoms, or when it depends positively on a lazy predicate.
    """
    graph = nx.DiGraph()
    roots = set()
    for template in templates:
        heads = _head_predicates(template.source)
        graph.add_nodes_from(heads)
        for atom in template.positive:
            graph.add_node(atom.signature)
            for head in heads:
                graph.add_edge(atom.signature, head)
        head = template.head_atom
        if head is not None and any(var in head.args for var, _ in template.lazy):
            roots.add(head.signature)
    lazy = set(roots)
    for root in roots:
        lazy |= nx.descendants(graph, root)
    return graph, frozenset(lazy)


def _range_from(universe: Iterable[Term], template: RuleTemplate, var: Var) -> List[Term]:
    return [term for term in sorted(universe, key=term_sort_key) if template.admits(var, term)]


@dataclass(eq=False)
class GroundProgram:
    """A program prepared for model checking over a finite domain.

    Attributes:
        program: The desugared program, edb facts included.
        domain: The grounding domain.
        templates: One template per rule.
        atom_base: Candidate ground atoms, closed under the heads of all
            rules that do not depend on lazily computed values.
        lazy_predicates: Predicates whose atoms are derived per interpretation.
        forced: Atoms true in every classical model (least model of the
            definite part).
    """

    program: Program
    domain: Domain
    templates: Tuple[RuleTemplate, ...]
    atom_base: FrozenSet[Atom]
    lazy_predicates: FrozenSet[Tuple[str, int]]
    forced: FrozenSet[Atom]
    budget: int = DEFAULT_BUDGET
    full: bool = False
    _instances: object = field(init=False, repr=False)
    _envs: object = field(init=False, repr=False)

    def __post_init__(self):
        self._instances = lru_cache(maxsize=512)(self._compute_instances)
        self._envs = lru_cache(maxsize=2048)(self._compute_env)

    @property
    def lazy_bindings(self) -> Dict[int, List[Tuple[Var, Constraint]]]:
        return {t.index: list(t.lazy) for t in self.templates if t.lazy}

    @property
    def deferred(self) -> List[RuleTemplate]:
        return [template for template in self.templates if template.deferred]

    @property
    def rules(self) -> List[Rule]:
        """Static instances; deferred rules and lazily bound variables stay symbolic."""
        found: List[Rule] = []
        universe = self.universe(self.atom_base)
        index = index_atoms(self.atom_base)
        for template in self.templates:
            if template.deferred:
                found.append(template.source)
                continue
            for binding in self._bindings(template, index, universe):
                found.append(substitute_rule(template.source, binding))
        return found

    def universe(self, atoms: Iterable[Atom]) -> FrozenSet[Term]:
        return self.domain.terms | frozenset(_args(atoms))

    def vocabulary(self) -> FrozenSet[Atom]:
        """Every ground instance over the static universe of an atom occurring in the program.

        Raises:
            BudgetExceededError: If the vocabulary grows beyond ``budget``.
        """
        universe = self.universe(self.atom_base)
        found: Set[Atom] = set(self.atom_base)
        for template in self.templates:
            for node in walk_rule(template.source):
                if not isinstance(node, Atom):
                    continue
                variables = [arg for arg in dict.fromkeys(node.args) if isinstance(arg, Var)]
                ranges = [_range_from(universe, template, var) for var in variables]
                for combo in itertools.product(*ranges):
                    found.add(instantiate(node, dict(zip(variables, combo))))
                    if len(found) > self.budget:
                        raise BudgetExceededError(f"vocabulary exceeds {self.budget} atoms")
        return frozenset(found)

    def _bindings(self, template: RuleTemplate, index, universe) -> Iterator[Binding]:
        free = template.free_globals if self.full else ()
        ranges = [_range_from(universe, template, var) for var in free]
        for binding in join(template.positive, index):
            if not all(template.admits(var, value) for var, value in binding.items()):
                continue
            for combo in itertools.product(*ranges):
                extended = dict(binding)
                extended.update(zip(free, combo))
                yield extended

    def instances_for(self, there: Iterable[Atom]) -> List[Tuple[RuleTemplate, Binding]]:
        """Rule instances whose positive body atoms all lie in ``there``.

        Instances with a positive body atom outside ``there`` are satisfied at
        both worlds and are left out.

        Raises:
            BudgetExceededError: If more than ``budget`` instances arise.
        """
        return self._instances(frozenset(there))

    def _compute_instances(self, there: FrozenSet[Atom]) -> List[Tuple[RuleTemplate, Binding]]:
        index = index_atoms(there)
        universe = self.universe(there)
        found = []
        for template in self.templates:
            for binding in self._bindings(template, index, universe):
                found.append((template, binding))
                if len(found) > self.budget:
                    raise BudgetExceededError(
                        f"more than {self.budget} rule instances; raise the instance budget"
                    )
        logger.debug(f"{len(found)} rule instances over {len(there)} atoms")
        return found

    def env_for(self, template: RuleTemplate, there: Iterable[Atom]) -> RangeEnv:
        """Ranges of the template's local variables under an interpretation with there-world ``there``."""
        return self._envs(template, frozenset(there))

    def _compute_env(self, template: RuleTemplate, there: FrozenSet[Atom]) -> RangeEnv:
        universe = self.universe(there)
        ranges = {var: frozenset(_range_from(universe, template, var)) for var in template.source.local_vars}
        return RangeEnv(ranges=ranges, sorts=template.sorts)

    def lazy_assignments(
        self, template: RuleTemplate, binding: Binding, evaluator: Evaluator, env: RangeEnv
    ) -> List[Binding]:
        """Extend ``binding`` by the values of the template's lazily bound variables.

        Each variable X bound by ``X = β`` takes ⟦β⟧ at the there-world and at
        the here-world; every other value falsifies the binding at every world.
        """
        results = [dict(binding)]
        for var, constraint in template.lazy:
            extended = []
            for partial in results:
                scoped = env.bind(partial)
                candidates = set()
                for world in (World.T, World.H):
                    value = evaluator.value(constraint.body, constraint.semiring, world, scoped)
                    candidates.add(to_term(value))
                for term in sorted(candidates, key=term_sort_key):
                    if template.admits(var, term):
                        extended.append({**partial, var: term})
            results = extended
        return results

    def ground_instances(self, interpretation: HTInterpretation) -> List[Rule]:
        """Fully ground rule instances relevant to ``interpretation``."""
        evaluator = Evaluator(interpretation)
        found = []
        for template, binding in self.instances_for(interpretation.there):
            env = self.env_for(template, interpretation.there)
            for assignment in self.lazy_assignments(template, binding, evaluator, env):
                found.append(substitute_rule(template.source, assignment))
        return found


def _head_atoms(
    template: RuleTemplate, binding: Binding, index, universe, lazy_predicates
) -> Set[Atom]:
    head = template.closed.head
    if isinstance(head, Atom):
        atom = instantiate(head, binding)
        return {atom} if atom is not None else set()
    if not isinstance(head, Constraint):
        return set()
    variables, body = [], head.body
    while isinstance(body, Sum):
        variables.append(body.var)
        body = body.body
    guard = guard_atom(body)
    joined = [var for var in variables if guard is not None and var in guard.args]
    rest = [var for var in variables if var not in joined]
    guard_matches = [binding]
    if joined:
        guard_matches = [
            match for match in join((guard,), index, binding) if all(template.admits(v, match[v]) for v in joined)
        ]
    ranges = [_range_from(universe, template, var) for var in rest]
    atoms = [node for node in walk(body) if isinstance(node, Atom) and node.signature not in lazy_predicates]
    found: Set[Atom] = set()
    for match in guard_matches:
        for combo in itertools.product(*ranges):
            scoped = dict(match)
            scoped.update(zip(rest, combo))
            for atom in atoms:
                ground = instantiate(atom, scoped)
                if ground is not None:
                    found.add(ground)
    return found


def _decidable(literal, bound) -> bool:
    """Whether ``literal`` is a constraint without atoms whose variables are all in ``bound``."""
    return (
        isinstance(literal, Constraint)
        and not any(isinstance(node, (Atom, Sum, Prod)) for node in walk(literal.body))
        and free_vars(literal) <= bound
    )


def _static_constraints_hold(template: RuleTemplate, binding: Mapping[Var, Term], undefined: bool = True) -> bool:
    bound = frozenset(binding)
    checks = [literal for literal in template.source.body if _decidable(literal, bound)]
    if not checks:
        return True
    env = RangeEnv(sorts=template.sorts).bind(binding)
    evaluator = Evaluator(HTInterpretation())
    for literal in checks:
        try:
            if not evaluator.sat(literal, World.T, env):
                return False
        except (EvaluationError, SemiringError):
            if not undefined:
                return False
    return True


def _is_definite(template: RuleTemplate) -> bool:
    if template.deferred or template.head_atom is None or template.free_globals:
        return False
    bound = frozenset(var for atom in template.positive for var in free_vars(atom))
    return all(isinstance(literal, Atom) or _decidable(literal, bound) for literal in template.source.body)


def _static_base(templates, edb, domain: Domain, lazy_predicates, budget: int, full: bool) -> FrozenSet[Atom]:
    base: Set[Atom] = set(edb)
    while True:
        index = index_atoms(base)
        universe = domain.terms | _args(base)
        derived: Set[Atom] = set()
        for template in templates:
            if template.deferred and template.head_atom is not None:
                continue
            free = template.free_globals if full else ()
            ranges = [_range_from(universe, template, var) for var in free]
            for binding in join(template.positive, index):
                for combo in itertools.product(*ranges):
                    scoped = dict(binding)
                    scoped.update(zip(free, combo))
                    if not _static_constraints_hold(template, scoped):
                        continue
                    derived |= _head_atoms(template, scoped, index, universe, lazy_predicates)
        derived = {atom for atom in derived if atom.signature not in lazy_predicates}
        if derived <= base:
            return frozenset(base)
        base |= derived
        if len(base) > budget:
            raise BudgetExceededError(f"atom base exceeds {budget} atoms")


def _definite_model(templates, edb) -> FrozenSet[Atom]:
    """Least model of the rules with an atom head, positive atoms and atom-free constraints in the body."""
    definite = [t for t in templates if _is_definite(t)]
    model: Set[Atom] = set(edb)
    while True:
        index = index_atoms(model)
        derived = set()
        for template in definite:
            for binding in join(template.positive, index):
                if not _static_constraints_hold(template, binding, undefined=False):
                    continue
                atom = instantiate(template.head_atom, binding)
                if atom is not None:
                    derived.add(atom)
        if derived <= model:
            return frozenset(model)
        model |= derived


def _reject_unsupported(templates: Sequence[RuleTemplate], lazy_predicates) -> None:
    for template in templates:
        if not template.deferred or template.head_atom is not None:
            continue
        head = template.source.head
        depends = any(atom.signature in lazy_predicates for atom in template.positive)
        mentions = any(isinstance(n, Atom) and n.signature in lazy_predicates for n in walk(head))
        if depends or mentions:
            raise GroundingError(
                f"rule {template.index}: constraint heads cannot depend on lazily computed values"
            )


def ground_program(
    program: Program,
    domain: Optional[Domain] = None,
    edb: Iterable[Atom] = (),
    budget: int = DEFAULT_BUDGET,
    full: bool = False,
    allow_value_invention: bool = False,
) -> GroundProgram:
    """Prepare ``program`` for model checking.

    Args:
        program: The program; surface constructs are desugared first.
        domain: Grounding domain; defaults to :func:`herbrand_domain`.
        edb: Extra ground facts.
        budget: Maximal number of rule instances or base atoms.
        full: Instantiate unbound global variables over the domain instead
            of rejecting unsafe rules.
        allow_value_invention: Accept programs whose bindings may invent values.

    Raises:
        GroundingError: On unsafe rules (unless ``full``), value invention
            (unless allowed) or unsupported lazy dependencies.
        BudgetExceededError: If the atom base grows beyond ``budget``.
    """
    if needs_desugaring(program):
        program = desugar_program(program)
    edb = frozenset(edb)
    for atom in edb:
        if not atom.is_ground:
            raise GroundingError(f"edb atom {atom.predicate} is not ground")
    facts = tuple(Rule(atom) for atom in sort_atoms(edb))
    program = Program(program.rules + facts, program.declared_domain)
    if not full:
        for index, rule in enumerate(program.rules):
            violations = rule_safety(rule)
            if violations:
                raise GroundingError(f"rule {index} is not safe: " + "; ".join(violations))
    if not allow_value_invention and check_value_invention(program):
        raise GroundingError(UNDECIDABLE_NOTE)
    if domain is None:
        domain = herbrand_domain(program)
    else:
        domain = domain.extended(herbrand_domain(program).terms)

    templates = [make_template(index, rule) for index, rule in enumerate(program.rules)]
    _, lazy_predicates = lazy_predicate_graph(templates)
    templates = [
        RuleTemplate(
            index=t.index,
            source=t.source,
            closed=t.closed,
            positive=t.positive,
            lazy=t.lazy,
            free_globals=t.free_globals,
            sorts=t.sorts,
            deferred=bool(
                t.lazy
                or any(atom.signature in lazy_predicates for atom in t.positive)
                or (t.head_atom is not None and t.head_atom.signature in lazy_predicates)
            ),
        )
        for t in templates
    ]
    _reject_unsupported(templates, lazy_predicates)
    base = _static_base(templates, edb, domain, lazy_predicates, budget, full)
    universe = domain.terms | _args(base)
    kept = []
    for template in templates:
        empty = [
            var
            for var in template.source.global_vars
            if template.sorts.get(var) and not any(template.admits(var, t) for t in universe)
        ]
        if empty and not template.deferred:
            names = ", ".join(var.name for var in empty)
            logger.warning(f"Rule {template.index} dropped: no domain values of the sort of {names}")
            continue
        kept.append(template)
    grounded = GroundProgram(
        program=program,
        domain=domain,
        templates=tuple(kept),
        atom_base=base,
        lazy_predicates=lazy_predicates,
        forced=_definite_model(kept, edb),
        budget=budget,
        full=full,
    )
    logger.debug(
        f"Grounded {len(kept)} rules: {len(base)} base atoms, {len(lazy_predicates)} lazy predicates"
    )
    return grounded


def resolve_lazy(rule: Rule, interpretation: HTInterpretation, domain: Optional[Domain] = None) -> List[Rule]:
    """Instances of ``rule`` for the values its lazily bound variables can take.

    Every global variable that is not lazily bound must already be ground.

    Raises:
        GroundingError: If another global variable is unbound.
    """
    template = make_template(0, rule)
    unbound = [
        var for var in rule.global_vars if var not in {v for v, _ in template.lazy}
    ]
    if unbound:
        names = ", ".join(var.name for var in unbound)
        raise GroundingError(f"cannot resolve lazy bindings with unbound variables {names}")
    grounded = GroundProgram(
        program=Program((rule,)),
        domain=domain or herbrand_domain(Program((rule,))),
        templates=(template,),
        atom_base=frozenset(),
        lazy_predicates=frozenset(),
        forced=frozenset(),
    )
    evaluator = Evaluator(interpretation)
    env = grounded.env_for(template, interpretation.there)
    return [
        substitute_rule(rule, assignment)
        for assignment in grounded.lazy_assignments(template, {}, evaluator, env)
    ]
