"""Configured experiment sweeps, persisted records and their summaries."""

from .runner import load_records, run_cell, run_experiment
from .spec import EXPERIMENTS, ExperimentSpec
from .summary import summarize

__all__ = ["EXPERIMENTS", "ExperimentSpec", "load_records", "run_cell", "run_experiment", "summarize"]
