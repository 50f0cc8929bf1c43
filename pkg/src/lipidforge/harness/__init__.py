"""Configuration, the training loop, evaluation and the command line."""

from .config import ConfigError, RunConfig, load_config, parse_config_text
from .evaluation import EmptyLogError, EvalReport, comparison_table, evaluate, series_csv, series_svg
from .pipeline import (
    RunLayout,
    StageError,
    Workspace,
    generate,
    initial_network,
    open_workspace,
    run_directory,
    run_iteration,
    train_loop,
)

__all__ = [
    "ConfigError", "EmptyLogError", "EvalReport", "RunConfig", "RunLayout", "StageError", "Workspace",
    "comparison_table", "evaluate", "generate", "initial_network", "load_config", "open_workspace",
    "parse_config_text", "run_directory", "run_iteration", "series_csv", "series_svg", "train_loop",
]
