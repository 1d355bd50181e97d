"""
Simulation Module
Scenario-driven data generation and the replication engine behind the
bias / SD / coverage tables
"""

from .scenario import (
    Scenario, MechanismKind, MarqMechanism, MartxqMechanism, NmarMechanism, AlwaysObserved,
    CensoringSpec, AlphaFitSpec, DEFAULT_BASELINE_LEVEL,
)
from .mechanisms import solve_marq_coefficients, true_missingness_model, assign_missingness, fitted_models
from .generator import generate_dataset, cumulative_hazard, subtype_two_probability
from .calibration import calibrate_baseline_level
from .summary import ReplicationSummary, replications_frame
from .replications import run_replications, run_replication, replication_dataset

__all__ = [
    "Scenario",
    "MechanismKind",
    "MarqMechanism",
    "MartxqMechanism",
    "NmarMechanism",
    "AlwaysObserved",
    "CensoringSpec",
    "AlphaFitSpec",
    "DEFAULT_BASELINE_LEVEL",
    "solve_marq_coefficients",
    "true_missingness_model",
    "assign_missingness",
    "fitted_models",
    "generate_dataset",
    "cumulative_hazard",
    "subtype_two_probability",
    "calibrate_baseline_level",
    "ReplicationSummary",
    "replications_frame",
    "run_replications",
    "run_replication",
    "replication_dataset",
]
