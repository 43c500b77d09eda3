"""Here-and-There interpretations and their text format."""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Tuple

from ac_solve.exceptions import InterpretationError, ParseError
from ac_solve.semiring import term_sort_key
from ac_solve.syntax.ast import Atom
from ac_solve.syntax.parser import parse_atoms
from ac_solve.syntax.printer import format_atom


class World(str, Enum):
    """The two HT worlds, ordered H ≤ T."""

    H = "H"
    T = "T"

    @property
    def successors(self) -> Tuple["World", ...]:
        """Worlds w′ with w′ ≥ self."""
        return (World.H, World.T) if self is World.H else (World.T,)


def atom_sort_key(atom: Atom) -> tuple:
    return (atom.predicate, atom.arity, tuple(term_sort_key(arg) for arg in atom.args))


def sort_atoms(atoms: Iterable[Atom]) -> List[Atom]:
    return sorted(atoms, key=atom_sort_key)


@dataclass(frozen=True)
class HTInterpretation:
    """A pair (I^H, I^T) of ground-atom sets with I^H ⊆ I^T."""

    here: FrozenSet[Atom] = field(default_factory=frozenset)
    there: FrozenSet[Atom] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "here", frozenset(self.here))
        object.__setattr__(self, "there", frozenset(self.there))
        extra = self.here - self.there
        if extra:
            names = ", ".join(format_atom(atom) for atom in sort_atoms(extra))
            raise InterpretationError(f"here-world is not contained in there-world: {names}")

    @classmethod
    def classical(cls, atoms: Iterable[Atom]) -> "HTInterpretation":
        atoms = frozenset(atoms)
        return cls(atoms, atoms)

    @property
    def is_total(self) -> bool:
        return self.here == self.there

    def at(self, world: World) -> FrozenSet[Atom]:
        return self.here if world is World.H else self.there

    def to_text(self) -> str:
        """Render in the ``#here`` / ``#there`` line format."""
        lines = ["#here"]
        lines.extend(format_atom(atom) for atom in sort_atoms(self.here))
        lines.append("#there")
        lines.extend(format_atom(atom) for atom in sort_atoms(self.there))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HTInterpretation":
        """Parse an interpretation file.

        Atoms before any section header, or under ``#there``, belong to the
        there-world. Without a ``#here`` section the interpretation is total.

        Raises:
            InterpretationError: On malformed atoms, unknown headers or
                here-atoms missing from the there-world.
        """
        sections = {"#here": [], "#there": []}
        current = "#there"
        seen_here = False
        for line in text.splitlines():
            stripped = line.strip()
            if stripped.startswith("#"):
                if stripped not in sections:
                    raise InterpretationError(f"unknown section header {stripped!r}")
                current = stripped
                seen_here = seen_here or stripped == "#here"
                continue
            sections[current].append(line)
        try:
            there = frozenset(parse_atoms(sections["#there"]))
            here = frozenset(parse_atoms(sections["#here"])) if seen_here else there
        except ParseError as e:
            raise InterpretationError(f"malformed interpretation: {e}") from e
        return cls(here, there)
