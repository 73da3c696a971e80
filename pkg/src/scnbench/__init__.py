"""
SCN Bench - Stochastic Configuration Networks

Incremental construction of single-hidden-layer regression models whose random
hidden nodes are admitted under a supervisory inequality, with constructive
(SC-I), sliding-window (SC-II) and global least-squares (SC-III) output weights,
plus the IRVFL baseline and a repeated-trial benchmark harness.
"""

from .bench import Bench
from .configurator import (
    Algorithm,
    CandidateScore,
    ConfigError,
    DegenerateCandidateError,
    RngStream,
    ScnConfig,
    Stalled,
    find_best_node,
    load_config,
    mu_L,
    xi_scores,
)
from .data import (
    DataParseError,
    Dataset,
    NormMeta,
    SplitSpec,
    gen_db1,
    gen_linear_sigmoid,
    load_csv,
    normalize_minmax,
    rmse,
    split,
)
from .linalg import DimensionError, NumericInputError, SolveTolerance, lstsq_min_norm
from .model import ActivationKind, HiddenNode, ScnModel, predict
from .persistence import ModelFileError, load_model, save_model, write_report
from .report_generator import ReportGenerator
from .trainer import StopReason, TrainingRun, TrainingTrace, TrialSummary, run_trials, train
from .version import __version__

__all__ = [
    'Bench', 'Algorithm', 'CandidateScore', 'ConfigError', 'DegenerateCandidateError',
    'RngStream', 'ScnConfig', 'Stalled', 'find_best_node', 'load_config', 'mu_L',
    'xi_scores', 'DataParseError', 'Dataset', 'NormMeta', 'SplitSpec', 'gen_db1',
    'gen_linear_sigmoid', 'load_csv', 'normalize_minmax', 'rmse', 'split',
    'DimensionError', 'NumericInputError', 'SolveTolerance', 'lstsq_min_norm',
    'ActivationKind', 'HiddenNode', 'ScnModel', 'predict', 'ModelFileError',
    'load_model', 'save_model', 'write_report', 'ReportGenerator', 'StopReason',
    'TrainingRun', 'TrainingTrace', 'TrialSummary', 'run_trials', 'train', '__version__',
]
