# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Configuration-driven experiment runs: TOML configs in, canonical CSV or
JSON-lines records, a JSON summary and optional SVG charts out.
"""
from .config import ExperimentConfig, example_configs, load_config
from .experiments import EXPERIMENTS, list_experiments, run_experiment
from .main import main
from .records import ResultRecord, read_records, write_records

__all__ = ['ExperimentConfig', 'load_config', 'example_configs',
           'EXPERIMENTS', 'list_experiments', 'run_experiment', 'main',
           'ResultRecord', 'read_records', 'write_records']
