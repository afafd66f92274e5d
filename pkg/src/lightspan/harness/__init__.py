"""Experiment harness: config handling, sweeps, Monte Carlo and the CLI."""

from .config import ExperimentConfig, load_config, parse_base, parse_seeds
from .cli import main

__all__ = ["ExperimentConfig", "load_config", "parse_base", "parse_seeds", "main"]
