"""Semiring provenance of positive datalog, stratified by leaf count.

The value of an atom for exactly ``l`` leaves is the ⊕ over its rule
instances and over all splits ``l = l1 + … + ln`` of the ⊗-product of the body
atoms' values for ``li`` leaves. Bodies have at least two atoms after padding,
so every ``li`` is smaller than ``l``.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

import networkx as nx

from ac_solve.exceptions import BudgetExceededError, ProvenanceError
from ac_solve.models import ProvenanceTable
from ac_solve.provenance.datalog import TOP_ATOM, DatalogProgram, GroundDatalog, ground_datalog
from ac_solve.semiring import NAT_INF, Infinity, SemiringDef, Value, sum_values
from ac_solve.syntax.ast import Atom

logger = logging.getLogger(__name__)

ORACLE_BUDGET = 10**5

LeafTable = Dict[Atom, Dict[int, Value]]


def _leaf_table(ground: GroundDatalog, edb: Mapping[Atom, Value], semiring: SemiringDef) -> LeafTable:
    table: LeafTable = {atom: {1: semiring.require(value)} for atom, value in edb.items()}
    table[TOP_ATOM] = {1: semiring.one}
    return table


def leaf_splits(body: Tuple[Atom, ...], total: int, table: LeafTable) -> Iterator[Tuple[int, ...]]:
    """Leaf counts ``(l1, …, ln)`` summing to ``total`` with an entry for every body atom."""

    def extend(position: int, remaining: int, chosen: Tuple[int, ...]):
        counts = table.get(body[position], {})
        if position == len(body) - 1:
            if remaining in counts:
                yield chosen + (remaining,)
            return
        still_needed = len(body) - position - 1
        for count in sorted(counts):
            if count > remaining - still_needed:
                break
            yield from extend(position + 1, remaining - count, chosen + (count,))

    yield from extend(0, total, ())


def _stratum_value(
    head: Atom, leaves: int, ground: GroundDatalog, table: LeafTable, semiring: SemiringDef
) -> Optional[Value]:
    total = None
    for body in ground.instances.get(head, ()):
        for split in leaf_splits(body, leaves, table):
            product = semiring.one
            for atom, count in zip(body, split):
                product = semiring.mul(product, table[atom][count])
            total = product if total is None else semiring.add(total, product)
    return total


def productive_atoms(ground: GroundDatalog, edb: Mapping[Atom, Value], semiring: SemiringDef) -> FrozenSet[Atom]:
    """Derived atoms with infinitely many derivation trees of non-zero label.

    These are the atoms on a cycle of rule instances whose bodies are all
    derivable with a non-zero label, plus everything downstream of them.
    """
    nonzero: Set[Atom] = {atom for atom, value in edb.items() if not semiring.equal(value, semiring.zero)}
    nonzero.add(TOP_ATOM)
    changed = True
    while changed:
        changed = False
        for head, bodies in ground.instances.items():
            if head not in nonzero and any(all(atom in nonzero for atom in body) for body in bodies):
                nonzero.add(head)
                changed = True
    graph = nx.DiGraph()
    for head, bodies in ground.instances.items():
        if head not in nonzero:
            continue
        for body in bodies:
            if all(atom in nonzero for atom in body):
                graph.add_edges_from((atom, head) for atom in body)
    cyclic: Set[Atom] = {node for node, _ in nx.selfloop_edges(graph)}
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            cyclic |= component
    infinite = set(cyclic)
    for atom in cyclic:
        infinite |= nx.descendants(graph, atom)
    return frozenset(infinite - ground.leaves)


def _stable(levels: Mapping[int, Value], semiring: SemiringDef, max_leaves: int, window: int) -> bool:
    cutoff = max_leaves - window
    if cutoff < 1:
        return False
    earlier = [value for count, value in levels.items() if count <= cutoff]
    if not earlier:
        return False
    return semiring.equal(sum_values(semiring, earlier), sum_values(semiring, levels.values()))


def _table(
    ground: GroundDatalog,
    table: LeafTable,
    semiring: SemiringDef,
    max_leaves: int,
    infinite: FrozenSet[Atom] = frozenset(),
) -> ProvenanceTable:
    by_leaves = {atom: dict(sorted(table[atom].items())) for atom in ground.derived if table.get(atom)}
    entries = {atom: sum_values(semiring, levels.values()) for atom, levels in by_leaves.items()}
    infinite = frozenset(atom for atom in infinite if atom in entries)
    for atom in infinite:
        entries[atom] = Infinity.POS
    window = len(ground.atoms)
    partial_atoms = frozenset(
        atom
        for atom, levels in by_leaves.items()
        if atom not in infinite and not _stable(levels, semiring, max_leaves, window)
    )
    return ProvenanceTable(
        semiring=semiring,
        entries=entries,
        by_leaves=by_leaves,
        max_leaves=max_leaves,
        converged=not partial_atoms,
        infinite_atoms=infinite,
        partial_atoms=partial_atoms,
    )


def compute_provenance(
    program: DatalogProgram,
    edb: Mapping[Atom, Value],
    semiring: SemiringDef,
    max_leaves: int,
    threads: int = 1,
) -> ProvenanceTable:
    """Provenance of every derivable atom over derivation trees with at most ``max_leaves`` leaves.

    Args:
        program: Positive datalog program.
        edb: Labels of the extensional atoms.
        semiring: Target semiring.
        max_leaves: Largest leaf count considered.
        threads: Worker threads per leaf-count stratum.

    Returns:
        A ProvenanceTable; over nat-inf, atoms with infinitely many non-zero
        derivations get ∞. ``converged`` is False when some total still
        changed within the last #atoms leaf counts.

    Raises:
        ProvenanceError: If ``max_leaves`` is below 1 or the edb clashes with the rules.
    """
    if max_leaves < 1:
        raise ProvenanceError("the leaf bound must be at least 1")
    ground = ground_datalog(program, edb)
    table = _leaf_table(ground, edb, semiring)
    derived = ground.derived
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for leaves in range(2, max_leaves + 1):
            compute = partial(_stratum_value, leaves=leaves, ground=ground, table=table, semiring=semiring)
            results = list(pool.map(compute, derived))
            for head, value in zip(derived, results):
                if value is not None:
                    table.setdefault(head, {})[leaves] = value
    infinite = productive_atoms(ground, edb, semiring) if semiring == NAT_INF else frozenset()
    result = _table(ground, table, semiring, max_leaves, infinite)
    if not result.converged:
        logger.warning(
            f"Provenance not converged within {max_leaves} leaves for {len(result.partial_atoms)} atoms"
        )
    logger.info(f"Provenance computed for {len(result.entries)} atoms over {semiring.signature}")
    return result


def compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    """All tuples of ``parts`` positive integers summing to ``total``."""
    if parts < 1 or total < parts:
        return []
    found = []
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        found.append(tuple(bounds[k + 1] - bounds[k] for k in range(parts)))
    return found


def provenance_tree_oracle(
    program: DatalogProgram,
    edb: Mapping[Atom, Value],
    semiring: SemiringDef,
    max_leaves: int,
    budget: int = ORACLE_BUDGET,
) -> ProvenanceTable:
    """Provenance by enumerating every derivation tree up to ``max_leaves`` leaves.

    Raises:
        BudgetExceededError: If more than ``budget`` trees are built.
    """
    ground = ground_datalog(program, edb)
    labels: Dict[Tuple[Atom, int], List[Value]] = {}
    built = 0

    def trees(atom: Atom, leaves: int) -> List[Value]:
        nonlocal built
        key = (atom, leaves)
        if key in labels:
            return labels[key]
        found: List[Value] = []
        if atom == TOP_ATOM:
            found = [semiring.one] if leaves == 1 else []
        elif atom in ground.leaves:
            found = [semiring.require(edb[atom])] if leaves == 1 else []
        else:
            for body in ground.instances.get(atom, ()):
                for split in compositions(leaves, len(body)):
                    children = [trees(child, count) for child, count in zip(body, split)]
                    for combination in itertools.product(*children):
                        label = semiring.one
                        for value in combination:
                            label = semiring.mul(label, value)
                        found.append(label)
                        built += 1
                        if built > budget:
                            raise BudgetExceededError(f"more than {budget} derivation trees")
        labels[key] = found
        return found

    table: LeafTable = {}
    for atom in ground.derived:
        for leaves in range(1, max_leaves + 1):
            found = trees(atom, leaves)
            if found:
                table.setdefault(atom, {})[leaves] = sum_values(semiring, found)
    return _table(ground, table, semiring, max_leaves)
