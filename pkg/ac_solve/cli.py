"""Command-line front end for ac-solve.

Usage::

    ac-solve solve program.acp [--max-models N] [--mode weak|strong]
    ac-solve check program.acp model.txt
    ac-solve analyze program.acp
    ac-solve seq first.acp second.acp
    ac-solve prov rules.dl --edb labels.edb --semiring nat-inf --max-leaves 10
    ac-solve ground program.acp

Results go to stdout, logs and errors to stderr. ``solve`` and ``check`` exit
with 10 (satisfiable / equilibrium) or 20 (unsatisfiable / not an equilibrium).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

from ac_solve import __version__
from ac_solve.analysis import check_safety
from ac_solve.config import Settings, load_settings
from ac_solve.desugar import desugar_program, needs_desugaring
from ac_solve.exceptions import (
    AcSolveError,
    AnalysisError,
    BudgetExceededError,
    DesugarError,
    EvaluationError,
    GroundingError,
    InterpretationError,
    ParseError,
    ProvenanceError,
    SemiringError,
    ValueParseError,
)
from ac_solve.grounder import ground_program
from ac_solve.interpretation import sort_atoms
from ac_solve.models import SolveConfig
from ac_solve.provenance import compute_provenance, parse_datalog, parse_edb, translate_provenance
from ac_solve.semiring import get_semiring
from ac_solve.solver import check_equilibrium, solve, strong_equivalence
from ac_solve.syntax.ast import Atom, Program
from ac_solve.syntax.parser import parse_atoms, parse_program
from ac_solve.syntax.printer import format_atom, print_program
from ac_solve.utils.logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_REJECTED = 3
EXIT_BUDGET = 4
EXIT_EVALUATION = 5
EXIT_SAT = 10
EXIT_UNSAT = 20

DEFAULT_MAX_LEAVES = 16

# Most specific classes first.
ERROR_KINDS: Tuple[Tuple[Type[BaseException], str, int], ...] = (
    (ValueParseError, "value", EXIT_PARSE),
    (ParseError, "parse", EXIT_PARSE),
    (InterpretationError, "interpretation", EXIT_PARSE),
    (AnalysisError, "analysis", EXIT_REJECTED),
    (DesugarError, "desugar", EXIT_REJECTED),
    (GroundingError, "grounding", EXIT_REJECTED),
    (ProvenanceError, "provenance", EXIT_REJECTED),
    (BudgetExceededError, "budget", EXIT_BUDGET),
    (EvaluationError, "evaluation", EXIT_EVALUATION),
    (SemiringError, "semiring", EXIT_EVALUATION),
)


class UsageError(Exception):
    """Raised for invalid command-line usage."""
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _read(path: str) -> str:
    file_path = Path(path)
    if not file_path.is_file():
        raise UsageError(f"file not found: {path}")
    return file_path.read_text()


def _load_program(path: str) -> Program:
    return parse_program(_read(path))


def _load_facts(path: Optional[str]) -> List[Atom]:
    if path is None:
        return []
    return parse_atoms(_read(path).splitlines())


def _emit(data: Any) -> None:
    print(json.dumps(data, indent=2))


def _solve_config(settings: Settings, args: argparse.Namespace) -> SolveConfig:
    return settings.solve_config(
        mode=args.mode,
        max_models=args.max_models,
        threads=args.threads,
        budget_instances=args.budget_instances,
    )


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    program = _load_program(args.program)
    cfg = _solve_config(settings, args)
    models = solve(program, cfg, edb=_load_facts(args.edb), allow_general=args.allow_general)
    logger.info(f"solve: {len(models)} models")
    if args.format == "json":
        _emit({
            "result": "SATISFIABLE" if models else "UNSATISFIABLE",
            "models": [[format_atom(atom) for atom in sort_atoms(model)] for model in models],
        })
    else:
        for number, model in enumerate(models, start=1):
            print(f"Answer: {number}")
            print(" ".join(format_atom(atom) for atom in sort_atoms(model)))
        print("SATISFIABLE" if models else "UNSATISFIABLE")
        print(f"Models: {len(models)}")
    return EXIT_SAT if models else EXIT_UNSAT


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    program = _load_program(args.program)
    cfg = _solve_config(settings, args)
    model = frozenset(_load_facts(args.model))
    report = check_safety(desugar_program(program) if needs_desugaring(program) else program)
    grounded = ground_program(
        program,
        edb=_load_facts(args.edb),
        budget=cfg.budget_instances,
        full=not report.safe,
        allow_value_invention=True,
    )
    verdict = check_equilibrium(grounded, model, cfg)
    logger.info(f"check: {len(model)} atoms, equilibrium={verdict}")
    if args.format == "json":
        _emit({"equilibrium": verdict, "model": [format_atom(atom) for atom in sort_atoms(model)]})
    else:
        print("EQUILIBRIUM" if verdict else "NOT EQUILIBRIUM")
    return EXIT_SAT if verdict else EXIT_UNSAT


def cmd_analyze(args: argparse.Namespace, settings: Settings) -> int:
    program = _load_program(args.program)
    if needs_desugaring(program):
        program = desugar_program(program)
    report = check_safety(program)
    if args.format == "json":
        _emit(report.model_dump(mode="json"))
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_seq(args: argparse.Namespace, settings: Settings) -> int:
    first, second = _load_program(args.first), _load_program(args.second)
    cfg = _solve_config(settings, args)
    witness = strong_equivalence(first, second, cfg, world_bits=settings.se_world_bits)
    if args.format == "json":
        _emit(witness.to_dict())
    else:
        sys.stdout.write(witness.to_text())
    return EXIT_OK


def cmd_prov(args: argparse.Namespace, settings: Settings) -> int:
    datalog = parse_datalog(_read(args.program))
    semiring = get_semiring(args.semiring)
    edb = parse_edb(_read(args.edb), semiring, datalog) if args.edb else {}
    if args.translate:
        sys.stdout.write(print_program(translate_provenance(datalog, semiring, args.max_leaves, edb)))
        return EXIT_OK
    max_leaves = args.max_leaves or DEFAULT_MAX_LEAVES
    threads = args.threads or settings.threads
    table = compute_provenance(datalog, edb, semiring, max_leaves, threads=threads)
    if args.format == "json":
        _emit(table.to_dict())
    else:
        for line in table.to_lines():
            print(line)
    return EXIT_OK if table.converged else EXIT_BUDGET


def cmd_ground(args: argparse.Namespace, settings: Settings) -> int:
    program = _load_program(args.program)
    cfg = _solve_config(settings, args)
    grounded = ground_program(
        program,
        edb=_load_facts(args.edb),
        budget=cfg.budget_instances,
        allow_value_invention=args.allow_general,
    )
    sys.stdout.write(print_program(Program(tuple(grounded.rules))))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "solve": cmd_solve,
    "check": cmd_check,
    "analyze": cmd_analyze,
    "seq": cmd_seq,
    "prov": cmd_prov,
    "ground": cmd_ground,
}


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["text", "json"], default="text", help="Output format")
    parser.add_argument("--config", help="YAML settings file")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")


def _solving(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=["weak", "strong"], help="Treatment of undefined values")
    parser.add_argument("--max-models", type=int, help="Stop after N models")
    parser.add_argument("--budget-instances", type=int, help="Maximal number of rule instances")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    parser = _ArgumentParser(prog="ac-solve", description="ASP with algebraic constraints over semirings")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_parser = commands.add_parser("solve", help="Enumerate equilibrium models")
    solve_parser.add_argument("program", help="Program file (.acp)")
    solve_parser.add_argument("--edb", help="File of ground facts, one atom per line")
    solve_parser.add_argument("--allow-general", action="store_true", help="Accept programs that invent values")
    _solving(solve_parser)
    _common(solve_parser)

    check_parser = commands.add_parser("check", help="Check whether a model is an equilibrium model")
    check_parser.add_argument("program", help="Program file (.acp)")
    check_parser.add_argument("model", help="File of atoms, one per line")
    check_parser.add_argument("--edb", help="File of ground facts, one atom per line")
    _solving(check_parser)
    _common(check_parser)

    analyze_parser = commands.add_parser("analyze", help="Report safety and fragment membership")
    analyze_parser.add_argument("program", help="Program file (.acp)")
    _common(analyze_parser)

    seq_parser = commands.add_parser("seq", help="Decide strong equivalence of two programs")
    seq_parser.add_argument("first", help="First program file")
    seq_parser.add_argument("second", help="Second program file")
    _solving(seq_parser)
    _common(seq_parser)

    prov_parser = commands.add_parser("prov", help="Semiring provenance of a datalog program")
    prov_parser.add_argument("program", help="Datalog file (.dl)")
    prov_parser.add_argument("--edb", help="Edb labels, one 'atom = value' per line")
    prov_parser.add_argument("--semiring", default="nat-inf", help="Target semiring")
    prov_parser.add_argument("--max-leaves", type=int, help="Leaf bound of derivation trees")
    prov_parser.add_argument("--translate", action="store_true", help="Print the AC-program translation")
    _common(prov_parser)

    ground_parser = commands.add_parser("ground", help="Print the ground program")
    ground_parser.add_argument("program", help="Program file (.acp)")
    ground_parser.add_argument("--edb", help="File of ground facts, one atom per line")
    ground_parser.add_argument("--allow-general", action="store_true", help="Accept programs that invent values")
    _solving(ground_parser)
    _common(ground_parser)
    return parser


def _validate(args: argparse.Namespace) -> None:
    for name in ("max_models", "budget_instances", "threads", "max_leaves"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be at least 1")


def _failure(error: BaseException) -> Tuple[str, int]:
    for error_type, kind, code in ERROR_KINDS:
        if isinstance(error, error_type):
            return kind, code
    return "internal", EXIT_EVALUATION


def _one_line(message: str) -> str:
    return " ".join(str(message).split())


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code.

    Args:
        argv: Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns:
        The process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as e:
        print(f"error[usage]: {_one_line(e)}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    setup_logging(level)
    try:
        settings = load_settings(args.config)
        return COMMANDS[args.command](args, settings)
    except UsageError as e:
        print(f"error[usage]: {_one_line(e)}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error[usage]: {_one_line(e)}", file=sys.stderr)
        return EXIT_USAGE
    except AcSolveError as e:
        kind, code = _failure(e)
        print(f"error[{kind}]: {_one_line(e)}", file=sys.stderr)
        logger.debug(f"{kind} failure", exc_info=True)
        return code


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
