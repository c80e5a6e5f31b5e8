"""Experiment drivers, config handling and the command-line interface."""

from .config import ConfigError, ExperimentConfig, load_config
from .props import run_property_suite
from .runners import RunReport, run, run_control_z, run_cross_kerr, run_scaling, run_self_kerr

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "load_config",
    "run",
    "run_control_z",
    "run_cross_kerr",
    "run_property_suite",
    "run_scaling",
    "run_self_kerr",
]
