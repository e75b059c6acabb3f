"""Monte Carlo simulator of a zero-added-loss multiplexing (ZALM) entangled-photon source."""

__version__ = "0.1.0"

from .config import SimConfig, SimMode, load_config
from .engine import Metrics, TrialOutcome, run_campaign, run_trial, run_trials, sweep

__all__ = [
    "Metrics",
    "SimConfig",
    "SimMode",
    "TrialOutcome",
    "load_config",
    "run_campaign",
    "run_trial",
    "run_trials",
    "sweep",
]
