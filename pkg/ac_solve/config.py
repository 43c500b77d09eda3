"""Settings loading: defaults, an optional YAML file, then the environment."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError
from yaml.parser import ParserError
from yaml.scanner import ScannerError

from ac_solve.exceptions import ParseError
from ac_solve.models import SolveConfig

logger = logging.getLogger(__name__)

THREADS_ENV = "AC_SOLVE_THREADS"


class Settings(BaseModel):
    """Solver settings shared by the library and the CLI."""

    threads: int = Field(default=1, ge=1)
    mode: Literal["weak", "strong"] = "strong"
    max_models: Optional[int] = Field(default=None, ge=1)
    budget_instances: int = Field(default=10**6, ge=1)
    max_candidate_atoms: int = Field(default=24, ge=0)
    completion_cap: int = Field(default=256, ge=1)
    se_world_bits: int = Field(default=40, ge=0)

    def solve_config(self, **overrides: Any) -> SolveConfig:
        """Build a SolveConfig, letting non-None ``overrides`` win."""
        values = {
            "mode": self.mode,
            "max_models": self.max_models,
            "threads": self.threads,
            "budget_instances": self.budget_instances,
            "max_candidate_atoms": self.max_candidate_atoms,
            "completion_cap": self.completion_cap,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return SolveConfig(**values)


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except (ParserError, ScannerError) as e:
        raise ParseError(f"Invalid YAML syntax in {path}: {str(e)}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParseError(f"Config file {path} must contain a mapping at the root level")
    return data


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Load settings from defaults, an optional YAML file and the environment.

    Args:
        path: Optional YAML config file.

    Returns:
        Validated Settings.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        ParseError: If the file is not valid YAML, or a value fails validation.
    """
    data: Dict[str, Any] = _read_yaml(Path(path)) if path is not None else {}
    load_dotenv()
    threads = os.getenv(THREADS_ENV)
    if threads:
        data["threads"] = threads
        logger.debug(f"Thread count {threads} taken from {THREADS_ENV}")
    try:
        return Settings(**data)
    except ValidationError as e:
        raise ParseError(f"Invalid settings: {str(e)}") from e
