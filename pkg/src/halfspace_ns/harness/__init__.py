"""Configuration, CLI and run persistence."""
from .commands import (EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_NONEXISTENCE, EXIT_NUMERICAL,
                       EXIT_OK, CommandResult, cmd_report, cmd_sweep, run_command)
from .config import RunConfig, apply_overrides, load_config, validate

__all__ = [name for name in dir() if not name.startswith("_")]
