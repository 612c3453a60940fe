"""Simulator for integrated access and backhaul in mmWave cell-free massive MIMO.

Modules
-------
numerics    SVD wrapper, random streams, unit conversions
channel     topology, steering vectors and mmWave channel draws
socp        interior-point solver for second-order cone programs
backhaul    CPU -> AP hybrid beamforming with max-min rate
access      AP -> user hybrid block-diagonalization precoding
allocation  bandwidth split and end-to-end rate
harness     scenario configuration, Monte-Carlo trials, sweeps and CSV
"""

from .errors import BDRankError, ConfigurationError, NumericalFailure, UndefinedSplitError
from .harness import ScenarioConfig, TrialResult, run_trial, run_trials, sweep

__version__ = "0.1.0"

__all__ = [
    "BDRankError",
    "ConfigurationError",
    "NumericalFailure",
    "UndefinedSplitError",
    "ScenarioConfig",
    "TrialResult",
    "run_trial",
    "run_trials",
    "sweep",
]
