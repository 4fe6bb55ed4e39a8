"""Sweeps, lemma checks, report I/O and the command-line front end."""
from .config import ConfigError, SweepConfig, load_config, log_tau_grid, worker_cap
from .lemmas import LEMMAS, LemmaResult, run_lemma_checks
from .report import SCHEMA_VERSION, emit, load_report, read_csv_rows
from .sweep import COLUMNS, CellSummary, RatioReport, SweepRow, run_verify

__all__ = [
    "COLUMNS",
    "CellSummary",
    "ConfigError",
    "LEMMAS",
    "LemmaResult",
    "RatioReport",
    "SCHEMA_VERSION",
    "SweepConfig",
    "SweepRow",
    "emit",
    "load_config",
    "load_report",
    "log_tau_grid",
    "read_csv_rows",
    "run_lemma_checks",
    "run_verify",
    "worker_cap",
]
