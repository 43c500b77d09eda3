"""
ac-solve - Answer Set Programming with algebraic constraints over semirings.
"""

__version__ = "0.1.0"

from ac_solve.semiring import (
    BOOL,
    INT,
    MAXTROP,
    NAT,
    NAT_INF,
    RAT,
    SemiringDef,
    get_semiring,
)
from ac_solve.syntax import Atom, Program, Rule, parse_program, print_program
from ac_solve.interpretation import HTInterpretation, World
from ac_solve.evaluator import eval_weighted, sat, support, tau_translate
from ac_solve.analysis import check_safety
from ac_solve.desugar import desugar_program
from ac_solve.grounder import GroundProgram, ground_program
from ac_solve.solver import check_equilibrium, enumerate_equilibrium, solve, strong_equivalence
from ac_solve.models import AnalysisReport, ProvenanceTable, SEWitness, SolveConfig
from ac_solve.config import Settings, load_settings
from ac_solve.provenance import (
    DatalogProgram,
    compute_provenance,
    parse_datalog,
    parse_edb,
    provenance_tree_oracle,
    translate_provenance,
)

__all__ = [
    'BOOL',
    'INT',
    'MAXTROP',
    'NAT',
    'NAT_INF',
    'RAT',
    'SemiringDef',
    'get_semiring',
    'Atom',
    'Program',
    'Rule',
    'parse_program',
    'print_program',
    'HTInterpretation',
    'World',
    'eval_weighted',
    'sat',
    'support',
    'tau_translate',
    'check_safety',
    'desugar_program',
    'GroundProgram',
    'ground_program',
    'check_equilibrium',
    'enumerate_equilibrium',
    'solve',
    'strong_equivalence',
    'AnalysisReport',
    'ProvenanceTable',
    'SEWitness',
    'SolveConfig',
    'Settings',
    'load_settings',
    'DatalogProgram',
    'compute_provenance',
    'parse_datalog',
    'parse_edb',
    'provenance_tree_oracle',
    'translate_provenance',
]
