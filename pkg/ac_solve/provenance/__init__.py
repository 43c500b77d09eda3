"""Semiring provenance for positive datalog programs."""

from ac_solve.provenance.datalog import (
    DatalogProgram,
    GroundDatalog,
    from_program,
    ground_datalog,
    parse_datalog,
    parse_edb,
)
from ac_solve.provenance.engine import compute_provenance, provenance_tree_oracle
from ac_solve.provenance.translation import final_values, translate_provenance

__all__ = [
    'DatalogProgram',
    'GroundDatalog',
    'from_program',
    'ground_datalog',
    'parse_datalog',
    'parse_edb',
    'compute_provenance',
    'provenance_tree_oracle',
    'translate_provenance',
    'final_values',
]
