"""Equilibrium models and strong equivalence by guess and check.

Candidate there-worlds are enumerated by increasing size, then
lexicographically. A candidate M is an equilibrium model when (M, M) is an
HT-model and no (I′, M) with I′ ⊊ M is one. Every such I′ contains the atoms
forced under M, so only subsets of the remaining atoms are tried.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import FrozenSet, Iterable, List, Optional, Set

from ac_solve.analysis import check_safety, require_solvable
from ac_solve.desugar import desugar_program, needs_desugaring
from ac_solve.evaluator import Evaluator, ground_atom
from ac_solve.exceptions import BudgetExceededError, GroundingError, UndefinedValueError
from ac_solve.grounder import GroundProgram, ground_program, herbrand_domain
from ac_solve.interpretation import HTInterpretation, World, atom_sort_key, sort_atoms
from ac_solve.models import SEWitness, SolveConfig
from ac_solve.syntax.ast import Atom, Constraint, Program, Rule, is_negation

logger = logging.getLogger(__name__)

DEFAULT_WORLD_BITS = 40


def model_sort_key(model: Iterable[Atom]) -> tuple:
    atoms = sort_atoms(model)
    return (len(atoms), [atom_sort_key(atom) for atom in atoms])


def check_ht_model(g: GroundProgram, interpretation: HTInterpretation) -> bool:
    """Whether ``(I^H, I^T, H)`` satisfies every rule instance of ``g``.

    Raises:
        UndefinedValueError: If some weighted formula has no defined value.
    """
    evaluator = Evaluator(interpretation)
    there = interpretation.there
    for template, binding in g.instances_for(there):
        env = g.env_for(template, there)
        for assignment in g.lazy_assignments(template, binding, evaluator, env):
            if not evaluator.sat(template.formula, World.H, env.bind(assignment)):
                return False
    return True


def _determined_true(literal, env, forced: Set[Atom], model: FrozenSet[Atom], total: Evaluator) -> bool:
    """Whether ``literal`` holds at H for every here-world between ``forced`` and ``model``."""
    if isinstance(literal, Atom):
        return ground_atom(literal, env) in forced
    try:
        if is_negation(literal):
            # ¬φ at H iff φ fails at T
            return total.sat(literal, World.T, env)
        if isinstance(literal, Constraint):
            mentioned: Set[Atom] = set()
            total.mentioned(literal, env, mentioned)
            if mentioned & (model - forced):
                return False
            partial = Evaluator(HTInterpretation(frozenset(forced), model))
            return partial.sat(literal, World.H, env)
    except UndefinedValueError:
        return False
    return False


def forced_atoms(g: GroundProgram, model: Iterable[Atom]) -> FrozenSet[Atom]:
    """Atoms contained in the here-world of every HT-model with there-world ``model``.

    ``model`` must itself be a classical model of ``g``.
    """
    model = frozenset(model)
    total = Evaluator(HTInterpretation.classical(model))
    instances = []
    for template, binding in g.instances_for(model):
        if template.head_atom is None:
            continue
        env = g.env_for(template, model)
        for assignment in g.lazy_assignments(template, binding, total, env):
            scoped = env.bind(assignment)
            instances.append((template, scoped, ground_atom(template.head_atom, scoped)))
    forced: Set[Atom] = set()
    changed = True
    while changed:
        changed = False
        for template, scoped, head in instances:
            if head in forced or head not in model:
                continue
            if all(_determined_true(lit, scoped, forced, model, total) for lit in template.closed.body):
                forced.add(head)
                changed = True
    return frozenset(forced)


def check_equilibrium(g: GroundProgram, model: Iterable[Atom], cfg: Optional[SolveConfig] = None) -> bool:
    """Whether ``model`` is an equilibrium model of ``g``.

    In weak mode an undefined value at a smaller interpretation counts as
    non-satisfaction; in strong mode it blocks the equilibrium.

    Raises:
        BudgetExceededError: If too many unforced atoms remain for the
            minimality check.
    """
    cfg = cfg or SolveConfig()
    model = frozenset(model)
    try:
        if not check_ht_model(g, HTInterpretation.classical(model)):
            return False
    except UndefinedValueError as e:
        logger.debug(f"Candidate rejected, undefined value: {e}")
        return False
    forced = forced_atoms(g, model)
    rest = sort_atoms(model - forced)
    if len(rest) > cfg.max_candidate_atoms:
        raise BudgetExceededError(
            f"minimality check over {len(rest)} unforced atoms exceeds the limit of {cfg.max_candidate_atoms}"
        )
    for size in range(len(rest)):
        for subset in itertools.combinations(rest, size):
            here = forced | frozenset(subset)
            try:
                smaller = check_ht_model(g, HTInterpretation(here, model))
            except UndefinedValueError:
                if cfg.mode == "strong":
                    return False
                continue
            if smaller:
                return False
    return True


def complete(g: GroundProgram, atoms: Iterable[Atom], cfg: Optional[SolveConfig] = None) -> FrozenSet[Atom]:
    """Add the atoms that rules over lazily computed values derive from ``atoms``.

    Each round rederives all lazy atoms from the previous round's result, so
    values computed from incomplete information are dropped again.

    Raises:
        BudgetExceededError: If no fixpoint is reached within ``completion_cap`` rounds.
    """
    cfg = cfg or SolveConfig()
    start = frozenset(atoms)
    current = start
    if not any(t.head_atom is not None for t in g.deferred):
        return current
    for _ in range(cfg.completion_cap):
        evaluator = Evaluator(HTInterpretation.classical(current))
        derived = set()
        for template, binding in g.instances_for(current):
            if not template.deferred or template.head_atom is None:
                continue
            env = g.env_for(template, current)
            for assignment in g.lazy_assignments(template, binding, evaluator, env):
                scoped = env.bind(assignment)
                if evaluator.sat(template.body, World.T, scoped):
                    derived.add(ground_atom(template.head_atom, scoped))
        following = start | derived
        if following == current:
            return current
        current = following
    raise BudgetExceededError(
        f"lazy completion did not reach a fixpoint within {cfg.completion_cap} rounds; "
        "only model checking is available for this program"
    )


def enumerate_equilibrium(g: GroundProgram, cfg: Optional[SolveConfig] = None) -> List[FrozenSet[Atom]]:
    """All (or the first ``max_models``) equilibrium models in size-lex order.

    Raises:
        BudgetExceededError: If the candidate atom base is too large.
    """
    cfg = cfg or SolveConfig()
    candidates = sort_atoms(g.atom_base - g.forced)
    if len(candidates) > cfg.max_candidate_atoms:
        raise BudgetExceededError(
            f"{len(candidates)} candidate atoms exceed the limit of {cfg.max_candidate_atoms}"
        )

    def check(subset) -> Optional[FrozenSet[Atom]]:
        atoms = complete(g, g.forced | frozenset(subset), cfg)
        return atoms if check_equilibrium(g, atoms, cfg) else None

    models: List[FrozenSet[Atom]] = []
    seen: Set[FrozenSet[Atom]] = set()
    # without lazy atoms a model's size is fixed by its candidate subset
    ordered = not g.lazy_predicates
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for size in range(len(candidates) + 1):
            batch = list(itertools.combinations(candidates, size))
            for result in pool.map(check, batch):
                if result is not None and result not in seen:
                    seen.add(result)
                    models.append(result)
            logger.debug(f"Checked {len(batch)} candidates of size {size}, {len(models)} models so far")
            if ordered and cfg.max_models is not None and len(models) >= cfg.max_models:
                break
    models.sort(key=model_sort_key)
    if cfg.max_models is not None:
        models = models[: cfg.max_models]
    logger.info(f"Found {len(models)} equilibrium models")
    return models


def solve(
    program: Program,
    cfg: Optional[SolveConfig] = None,
    edb: Iterable[Atom] = (),
    allow_general: bool = False,
) -> List[FrozenSet[Atom]]:
    """Desugar, analyze, ground and enumerate in one step.

    Raises:
        AnalysisError: If the program is unsafe or, without ``allow_general``,
            outside the decidable fragment.
    """
    cfg = cfg or SolveConfig()
    if needs_desugaring(program):
        program = desugar_program(program)
    require_solvable(check_safety(program), allow_general)
    grounded = ground_program(
        program, edb=edb, budget=cfg.budget_instances, allow_value_invention=allow_general
    )
    return enumerate_equilibrium(grounded, cfg)


def _witness(interpretation: HTInterpretation, model_of: int, total_differs: bool) -> SEWitness:
    if total_differs:
        extension = Program(tuple(Rule(atom) for atom in sort_atoms(interpretation.there)))
        distinguished = model_of
    else:
        gap = sort_atoms(interpretation.there - interpretation.here)
        rules = [Rule(atom) for atom in sort_atoms(interpretation.here)]
        rules.extend(Rule(p, (q,)) for p in gap for q in gap if p != q)
        extension = Program(tuple(rules))
        distinguished = 2 if model_of == 1 else 1
    return SEWitness(
        equivalent=False,
        counterexample=interpretation,
        model_of=model_of,
        extension=extension,
        distinguished_program=distinguished,
    )


def strong_equivalence(
    p1: Program,
    p2: Program,
    cfg: Optional[SolveConfig] = None,
    world_bits: int = DEFAULT_WORLD_BITS,
) -> SEWitness:
    """Decide strong equivalence by comparing HT-models.

    Pairs (I^H, I^T) over the union vocabulary are enumerated with I^T in
    size-lex order and, for each, I^H in size-lex order. The first pair that
    is an HT-model of exactly one program is returned as the counterexample.

    Raises:
        BudgetExceededError: If 2·|atoms| exceeds ``world_bits``.
        GroundingError: If a program derives atoms from computed values.
    """
    cfg = cfg or SolveConfig()
    p1 = desugar_program(p1) if needs_desugaring(p1) else p1
    p2 = desugar_program(p2) if needs_desugaring(p2) else p2
    domain = herbrand_domain(p1 + p2)
    grounded = [
        ground_program(p, domain, budget=cfg.budget_instances, full=True, allow_value_invention=True)
        for p in (p1, p2)
    ]
    if any(g.lazy_predicates for g in grounded):
        raise GroundingError("strong equivalence needs a finite vocabulary; a program derives atoms from computed values")
    atoms = sort_atoms(grounded[0].vocabulary() | grounded[1].vocabulary())
    if 2 * len(atoms) > world_bits:
        raise BudgetExceededError(
            f"strong equivalence over {len(atoms)} atoms needs {2 * len(atoms)} world bits, limit is {world_bits}"
        )
    first, second = grounded
    for size in range(len(atoms) + 1):
        for there in itertools.combinations(atoms, size):
            there = frozenset(there)
            total = HTInterpretation.classical(there)
            t1, t2 = check_ht_model(first, total), check_ht_model(second, total)
            if not (t1 or t2):
                continue
            members = sort_atoms(there)
            for here_size in range(len(members) + 1):
                for here in itertools.combinations(members, here_size):
                    point = HTInterpretation(frozenset(here), there)
                    m1 = t1 and check_ht_model(first, point)
                    m2 = t2 and check_ht_model(second, point)
                    if m1 != m2:
                        logger.info("Programs are not strongly equivalent")
                        return _witness(point, 1 if m1 else 2, t1 != t2)
    logger.info("Programs are strongly equivalent")
    return SEWitness(equivalent=True)
