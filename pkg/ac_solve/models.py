"""Data models for ac-solve results and configuration."""

from typing import Any, Dict, FrozenSet, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, InstanceOf

from ac_solve.interpretation import HTInterpretation, sort_atoms
from ac_solve.semiring import SemiringDef
from ac_solve.syntax.ast import Atom, Program
from ac_solve.syntax.printer import format_atom, print_program


class SolveConfig(BaseModel):
    """Options for equilibrium-model checking and enumeration."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["weak", "strong"] = "strong"
    max_models: Optional[int] = Field(default=None, ge=1)
    threads: int = Field(default=1, ge=1)
    budget_instances: int = Field(default=10**6, ge=1)
    max_candidate_atoms: int = Field(default=24, ge=0)
    completion_cap: int = Field(default=256, ge=1)
    enumeration_order: Literal["size-lex"] = "size-lex"


class SEWitness(BaseModel):
    """Outcome of a strong-equivalence check."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    equivalent: bool
    counterexample: Optional[InstanceOf[HTInterpretation]] = None
    model_of: Optional[Literal[1, 2]] = None
    extension: Optional[InstanceOf[Program]] = None
    distinguished_program: Optional[Literal[1, 2]] = None

    def to_text(self) -> str:
        if self.equivalent:
            return "EQUIVALENT\n"
        lines = ["NOT EQUIVALENT", f"HT-model of program {self.model_of} only:"]
        lines.append(self.counterexample.to_text().rstrip("\n"))
        if self.extension is not None:
            lines.append(f"extension making program {self.distinguished_program} differ:")
            lines.append(print_program(self.extension).rstrip("\n"))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"equivalent": self.equivalent}
        if not self.equivalent:
            data["counterexample"] = {
                "here": [format_atom(a) for a in sort_atoms(self.counterexample.here)],
                "there": [format_atom(a) for a in sort_atoms(self.counterexample.there)],
            }
            data["model_of"] = self.model_of
            data["extension"] = print_program(self.extension) if self.extension is not None else None
            data["distinguished_program"] = self.distinguished_program
        return data


class RuleReport(BaseModel):
    """Static-analysis verdicts for one rule."""

    index: int
    text: str
    safe: bool
    violations: List[str] = []
    formula_sdi: List[bool] = []
    head_domain_restricted: Optional[bool] = None
    value_invention: bool = False


class AnalysisReport(BaseModel):
    """Static-analysis verdicts for a program."""

    rules: List[RuleReport]
    value_invention: bool
    finitely_groundable: bool
    fragment: Literal["ground", "safe-decidable", "safe-general", "unsafe"]
    diagnostics: List[str] = []

    @property
    def safe(self) -> bool:
        return all(rule.safe for rule in self.rules)

    def to_text(self) -> str:
        lines = [
            f"fragment: {self.fragment}",
            f"safe: {str(self.safe).lower()}",
            f"value_invention: {str(self.value_invention).lower()}",
            f"finitely_groundable: {str(self.finitely_groundable).lower()}",
        ]
        for rule in self.rules:
            status = "safe" if rule.safe else "unsafe"
            lines.append(f"rule {rule.index}: {status}: {rule.text}")
            for violation in rule.violations:
                lines.append(f"  violation: {violation}")
            if rule.head_domain_restricted is not None:
                lines.append(f"  head domain restricted: {str(rule.head_domain_restricted).lower()}")
            if rule.value_invention:
                lines.append("  value invention")
        lines.extend(f"note: {diagnostic}" for diagnostic in self.diagnostics)
        return "\n".join(lines) + "\n"


class ProvenanceTable(BaseModel):
    """Provenance values of derivable atoms up to a leaf-count bound."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    semiring: SemiringDef
    entries: Dict[InstanceOf[Atom], Any] = {}
    by_leaves: Dict[InstanceOf[Atom], Dict[int, Any]] = {}
    max_leaves: int
    converged: bool
    infinite_atoms: FrozenSet[InstanceOf[Atom]] = frozenset()
    partial_atoms: FrozenSet[InstanceOf[Atom]] = frozenset()

    def value(self, atom: Atom):
        return self.entries.get(atom, self.semiring.zero)

    def status(self, atom: Atom) -> str:
        if atom in self.infinite_atoms:
            return "infinite"
        if atom in self.partial_atoms:
            return "partial"
        return "converged"

    def to_lines(self) -> List[str]:
        return [
            f"{format_atom(atom)} = {self.semiring.format(self.entries[atom])} [{self.status(atom)}]"
            for atom in sort_atoms(self.entries)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "semiring": self.semiring.signature,
            "max_leaves": self.max_leaves,
            "converged": self.converged,
            "atoms": [
                {
                    "atom": format_atom(atom),
                    "value": self.semiring.format(self.entries[atom]),
                    "status": self.status(atom),
                }
                for atom in sort_atoms(self.entries)
            ],
        }
