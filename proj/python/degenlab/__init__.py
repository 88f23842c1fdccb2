"""Heat and wave propagators of degenerate divergence-form operators."""

import json

from ._core import (
    ConfigError,
    DomainError,
    Field,
    GridMismatch,
    Model,
    ParameterError,
    c_delta,
    describe,
    list_scenarios,
    validate_config,
)
from ._core import run as _run

__all__ = [
    "ConfigError",
    "DomainError",
    "Field",
    "GridMismatch",
    "Model",
    "ParameterError",
    "c_delta",
    "describe",
    "list_scenarios",
    "run",
    "validate_config",
]


def run(config, *, grid_override=None, jobs=None, seed=None, out=None):
    """Run a packaged scenario name or YAML config text.

    Returns ``(exit_code, report)`` with the report parsed from JSON.
    """
    code, text = _run(config, grid_override, jobs, seed, None if out is None else str(out))
    return code, json.loads(text)
