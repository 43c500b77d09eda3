"""Translation of positive datalog into an AC-program computing its provenance.

For a rule ``i`` with head ``r(Ȳ)`` and padded body ``q1, …, qn``, where ``Z̄``
are the body variables not in the head, the program contains::

    pz_r_i(Ȳ,V,L,Z̄,L1,…,Ln) :- pl_q1(X̄1,V1,L1), …, L =[nat]{L1+…+Ln}, V =[R]{V1*…*Vn}.
    dz_r_i(Ȳ,L,Z̄,L1,…,Ln)   :- pl_q1(X̄1,V1,L1), …, L =[nat]{L1+…+Ln}.
    pi_r(Ȳ,V,L,i) :- dz_r_i(Ȳ,L,Z̄,L1,…,Ln), V =[R]{ pz_r_i(Ȳ,V',L,Z̄',L1',…,Ln') * V' }.
    di_r(Ȳ,L,i)   :- dz_r_i(Ȳ,L,Z̄,L1,…,Ln).

and for every idb predicate ``r``::

    pl_r(Ȳ,V,L) :- di_r(Ȳ,L,I), V =[R]{ pi_r(Ȳ,V',L,I') * V' }.
    dl_r(Ȳ,L)   :- di_r(Ȳ,L,I).
    p_r(Ȳ,V)    :- dl_r(Ȳ,L), V =[R]{ pl_r(Ȳ,V',L') * V' }.

Primed variables are local and summed over. Extensional atoms become facts
``pl_e(x̄,v,1)``. With a leaf bound every ``L`` is additionally guarded by
``leaf(L)`` facts for ``1..Lmax``.
"""

import logging
from typing import Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from ac_solve.exceptions import ProvenanceError
from ac_solve.provenance.datalog import TOP_ATOM, DatalogProgram
from ac_solve.semiring import NAT, SemiringDef, Value, to_term
from ac_solve.syntax.ast import Atom, Constraint, Embed, Plus, Program, Rule, Times, Var
from ac_solve.syntax.variables import ordered_vars

logger = logging.getLogger(__name__)

PREFIXES = ("p_", "pz_", "dz_", "pi_", "di_", "pl_", "dl_")
LEAF_PREDICATE = "leaf"


class _Names:
    """Variable names unused by one source rule."""

    def __init__(self, taken: Iterable[Var]):
        self.taken: Set[str] = {var.name for var in taken}

    def var(self, base: str) -> Var:
        name = base
        suffix = 0
        while name in self.taken:
            suffix += 1
            name = f"{base}x{suffix}"
        self.taken.add(name)
        return Var(name)


def _check_names(program: DatalogProgram) -> None:
    for name, _ in program.predicates:
        if name == LEAF_PREDICATE or name.startswith(PREFIXES):
            raise ProvenanceError(f"predicate {name} clashes with a name used by the provenance translation")


def _chain(factors: Sequence, node_type):
    node = factors[0]
    for factor in factors[1:]:
        node = node_type(node, factor)
    return node


def _weighted_sum(semiring: SemiringDef, target: Var, guard: Atom, value: Var) -> Constraint:
    return Constraint(target, "=", semiring, Times(Embed(guard), value))


def _rule_block(
    index: int, rule: Rule, semiring: SemiringDef, truncated: bool
) -> List[Rule]:
    head = rule.head
    names = _Names(ordered_vars(rule.head) + [v for atom in rule.body for v in ordered_vars(atom)])
    head_vars = set(ordered_vars(head))
    extra = []
    for atom in rule.body:
        for var in ordered_vars(atom):
            if var not in head_vars and var not in extra:
                extra.append(var)
    value, leaves = names.var("V"), names.var("L")
    values = [names.var(f"V{k}") for k in range(1, len(rule.body) + 1)]
    counts = [names.var(f"L{k}") for k in range(1, len(rule.body) + 1)]

    body = [Atom(f"pl_{atom.predicate}", atom.args + (v, l)) for atom, v, l in zip(rule.body, values, counts)]
    body.append(Constraint(leaves, "=", NAT, _chain(counts, Plus)))
    if truncated:
        body.append(Atom(LEAF_PREDICATE, (leaves,)))
    product = Constraint(value, "=", semiring, _chain(values, Times))

    r = head.predicate
    per_value = f"pz_{r}_{index}"
    per_split = f"dz_{r}_{index}"
    split_args = head.args + (leaves,) + tuple(extra) + tuple(counts)
    rules = [
        Rule(Atom(per_value, head.args + (value, leaves) + tuple(extra) + tuple(counts)), tuple(body) + (product,)),
        Rule(Atom(per_split, split_args), tuple(body)),
    ]

    summed_value = names.var("Vs")
    summed_extra = tuple(names.var(f"{var.name}s") for var in extra)
    summed_counts = tuple(names.var(f"L{k}s") for k in range(1, len(rule.body) + 1))
    guard = Atom(per_value, head.args + (summed_value, leaves) + summed_extra + summed_counts)
    derivable = Atom(per_split, split_args)
    rules.append(
        Rule(
            Atom(f"pi_{r}", head.args + (value, leaves, index)),
            (derivable, _weighted_sum(semiring, value, guard, summed_value)),
        )
    )
    rules.append(Rule(Atom(f"di_{r}", head.args + (leaves, index)), (derivable,)))
    return rules


def _predicate_block(predicate: str, arity: int, semiring: SemiringDef) -> List[Rule]:
    names = _Names(())
    args = tuple(names.var(f"Y{k}") for k in range(1, arity + 1))
    value, leaves, index = names.var("V"), names.var("L"), names.var("I")
    summed_value, summed_leaves, summed_index = names.var("Vs"), names.var("Ls"), names.var("Is")
    per_rule = Atom(f"di_{predicate}", args + (leaves, index))
    per_count = Atom(f"dl_{predicate}", args + (leaves,))
    return [
        Rule(
            Atom(f"pl_{predicate}", args + (value, leaves)),
            (
                per_rule,
                _weighted_sum(
                    semiring, value, Atom(f"pi_{predicate}", args + (summed_value, leaves, summed_index)), summed_value
                ),
            ),
        ),
        Rule(per_count, (per_rule,)),
        Rule(
            Atom(f"p_{predicate}", args + (value,)),
            (
                per_count,
                _weighted_sum(
                    semiring, value, Atom(f"pl_{predicate}", args + (summed_value, summed_leaves)), summed_value
                ),
            ),
        ),
    ]


def _edb_facts(edb: Mapping[Atom, Value], semiring: SemiringDef) -> List[Rule]:
    labels = dict(edb)
    labels[TOP_ATOM] = semiring.one
    return [
        Rule(Atom(f"pl_{atom.predicate}", atom.args + (to_term(semiring.require(value)), 1)))
        for atom, value in labels.items()
    ]


def translate_provenance(
    program: DatalogProgram,
    semiring: SemiringDef,
    max_leaves: Optional[int] = None,
    edb: Optional[Mapping[Atom, Value]] = None,
) -> Program:
    """Translate ``program`` into an AC-program whose ``p_r`` atoms carry provenance values.

    Args:
        program: Positive datalog program.
        semiring: Target semiring R.
        max_leaves: Optional bound on derivation-tree leaves; adds ``leaf`` facts.
        edb: Optional edb labels, added as ``pl_e(x̄, v, 1)`` facts.

    Returns:
        The translated program. It invents values, so solving it needs the
        general fragment enabled.

    Raises:
        ProvenanceError: If a predicate name clashes with a generated name or
            ``max_leaves`` is below 1.
    """
    _check_names(program)
    if max_leaves is not None and max_leaves < 1:
        raise ProvenanceError("the leaf bound must be at least 1")
    truncated = max_leaves is not None
    rules: List[Rule] = []
    for index, rule in enumerate(program.padded()):
        rules.extend(_rule_block(index, rule, semiring, truncated))
    for predicate, arity in sorted(program.idb_predicates):
        rules.extend(_predicate_block(predicate, arity, semiring))
    rules.extend(_edb_facts(edb or {}, semiring))
    if truncated:
        rules.extend(Rule(Atom(LEAF_PREDICATE, (count,))) for count in range(1, max_leaves + 1))
    logger.info(f"Translated {len(program.rules)} datalog rules into {len(rules)} AC-rules")
    return Program(tuple(rules))


def final_values(atoms: Iterable[Atom], predicates: Iterable[Tuple[str, int]]) -> Mapping[Atom, object]:
    """Read the ``p_r(x̄, v)`` atoms of a model back as ``r(x̄) ↦ v``."""
    wanted = {(f"p_{name}", arity + 1): name for name, arity in predicates}
    values = {}
    for atom in atoms:
        name = wanted.get(atom.signature)
        if name is not None:
            values[Atom(name, atom.args[:-1])] = atom.args[-1]
    return values
