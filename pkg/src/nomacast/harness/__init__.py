"""Experiment configuration, Monte-Carlo runner and CSV output."""
from .config import ConfigError, ScenarioConfig, dumps, load, loads
from .figures import FIGURE_IDS, replicate_figure
from .output import aggregate, aggregate_csv, raw_csv, read_raw, reaggregate, write_outputs
from .runner import TrialRecord, run_trial, run_trials, trial_seeds

__all__ = [
    "ConfigError", "ScenarioConfig", "dumps", "load", "loads", "FIGURE_IDS",
    "replicate_figure", "aggregate", "aggregate_csv", "raw_csv", "read_raw", "reaggregate",
    "write_outputs", "TrialRecord", "run_trial", "run_trials", "trial_seeds",
]
