from .auditor import audit_partial_dp
from .harness import ExperimentRunner, play, run_trial, run_trials
from .sweep import run_sweep

__all__ = ["ExperimentRunner", "audit_partial_dp", "play", "run_sweep", "run_trial", "run_trials"]
