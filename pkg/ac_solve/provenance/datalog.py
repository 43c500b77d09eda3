"""Positive datalog programs, edb files and semi-naive grounding."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from ac_solve.exceptions import ParseError, ProvenanceError
from ac_solve.grounder import index_atoms, instantiate, join
from ac_solve.interpretation import atom_sort_key, sort_atoms
from ac_solve.semiring import SemiringDef, Value
from ac_solve.syntax.ast import Atom, Program, Rule, Var
from ac_solve.syntax.parser import parse_atom, parse_program
from ac_solve.syntax.printer import format_atom

logger = logging.getLogger(__name__)

TOP_PREDICATE = "top"
TOP_ATOM = Atom(TOP_PREDICATE, ())

Signature = Tuple[str, int]


@dataclass(frozen=True)
class DatalogProgram:
    """Positive rules with atom heads and conjunctive atom bodies."""

    rules: Tuple[Rule, ...]
    edb_predicates: FrozenSet[Signature]

    @property
    def idb_predicates(self) -> FrozenSet[Signature]:
        return frozenset(rule.head.signature for rule in self.rules)

    @property
    def predicates(self) -> FrozenSet[Signature]:
        return self.idb_predicates | self.edb_predicates

    def padded(self) -> Tuple[Rule, ...]:
        """Rules with ``top`` appended until every body has at least two atoms."""
        rules = []
        for rule in self.rules:
            body = rule.body
            while len(body) < 2:
                body = body + (TOP_ATOM,)
            rules.append(Rule(rule.head, body))
        return tuple(rules)


def from_program(program: Program) -> DatalogProgram:
    """Check that ``program`` is positive datalog and split off its edb predicates.

    Raises:
        ProvenanceError: On constraints, negation, non-atom heads, unsafe
            variables or use of the reserved ``top`` predicate.
    """
    heads = set()
    for index, rule in enumerate(program.rules):
        if not isinstance(rule.head, Atom):
            raise ProvenanceError(f"rule {index}: provenance needs an atom head")
        for literal in rule.body:
            if not isinstance(literal, Atom):
                raise ProvenanceError(f"rule {index}: provenance is defined for positive atom bodies only")
        body_vars = {arg for atom in rule.body for arg in atom.args if isinstance(arg, Var)}
        unsafe = [arg.name for arg in rule.head.args if isinstance(arg, Var) and arg not in body_vars]
        if unsafe:
            raise ProvenanceError(f"rule {index}: head variables {', '.join(unsafe)} do not occur in the body")
        heads.add(rule.head.signature)
    body_predicates = {atom.signature for rule in program.rules for atom in rule.body}
    if any(name == TOP_PREDICATE for name, _ in heads | body_predicates):
        raise ProvenanceError(f"predicate {TOP_PREDICATE} is reserved for padding")
    return DatalogProgram(tuple(program.rules), frozenset(body_predicates - heads))


def parse_datalog(text: str) -> DatalogProgram:
    """Parse a ``.dl`` file into a DatalogProgram."""
    return from_program(parse_program(text))


def parse_edb(text: str, semiring: SemiringDef, program: Optional[DatalogProgram] = None) -> Dict[Atom, Value]:
    """Parse ``atom = value`` lines into edb labels.

    Blank lines and ``%`` comments are skipped. A repeated atom keeps the
    ⊕-sum of its labels.

    Raises:
        ParseError: On malformed lines.
        ProvenanceError: If an atom's predicate occurs in a rule head.
    """
    labels: Dict[Atom, Value] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("%", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"edb line {number}: expected 'atom = value'", line=number, column=1)
        atom_text, value_text = stripped.rsplit("=", 1)
        atom = parse_atom(atom_text.strip().rstrip("."))
        value = semiring.parse(value_text.strip().rstrip("."))
        if program is not None and atom.signature in program.idb_predicates:
            raise ProvenanceError(f"edb atom {format_atom(atom)} uses a predicate defined by rules")
        labels[atom] = semiring.add(labels[atom], value) if atom in labels else value
    return labels


@dataclass(frozen=True)
class GroundDatalog:
    """Derivable ground atoms and the rule instances deriving them.

    Bodies are listed once per rule, so two rules with the same ground body
    give two instances.
    """

    atoms: FrozenSet[Atom]
    leaves: FrozenSet[Atom]
    instances: Mapping[Atom, Tuple[Tuple[Atom, ...], ...]]

    @property
    def derived(self) -> List[Atom]:
        return sort_atoms(self.atoms - self.leaves)


def ground_datalog(program: DatalogProgram, edb: Mapping[Atom, Value]) -> GroundDatalog:
    """Semi-naive bottom-up grounding of the padded program over ``edb``.

    Raises:
        ProvenanceError: If an edb atom uses a predicate defined by rules.
    """
    for atom in edb:
        if atom.signature in program.idb_predicates:
            raise ProvenanceError(f"edb atom {format_atom(atom)} uses a predicate defined by rules")
    rules = program.padded()
    leaves = frozenset(edb) | {TOP_ATOM}
    facts = set(leaves)
    delta = set(leaves)
    instances: Dict[Atom, set] = {}
    rounds = 0
    while delta:
        rounds += 1
        full_index = index_atoms(facts)
        delta_index = index_atoms(delta)
        fresh = set()
        for number, rule in enumerate(rules):
            for position, pivot in enumerate(rule.body):
                others = rule.body[:position] + rule.body[position + 1:]
                for binding in join((pivot,), delta_index):
                    for complete in join(others, full_index, binding):
                        head = instantiate(rule.head, complete)
                        body = tuple(instantiate(atom, complete) for atom in rule.body)
                        instances.setdefault(head, set()).add((number, body))
                        if head not in facts:
                            fresh.add(head)
        facts |= fresh
        delta = fresh
    logger.debug(f"Grounded datalog program in {rounds} rounds: {len(facts)} atoms")
    ordered = {
        head: tuple(
            body for _, body in sorted(bodies, key=lambda item: (item[0], [atom_sort_key(atom) for atom in item[1]]))
        )
        for head, bodies in instances.items()
    }
    return GroundDatalog(frozenset(facts), leaves, ordered)
