"""
Inference Module
Newton-Raphson fitting, GR root finding, sandwich covariance and Wald
intervals, routed per estimator by the estimation service
"""

from .types import FitOptions, FitResult, ModelSpecification
from .config import ESTIMATOR_CONFIGS, DEFAULT_ESTIMATORS
from .newton import maximize, solve_gr
from .sandwich import sandwich_covariance, standard_errors
from .wald import wald_interval, p_value, coefficient_table, covers
from .estimators import EstimationService, estimation_service

__all__ = [
    "FitOptions",
    "FitResult",
    "ModelSpecification",
    "ESTIMATOR_CONFIGS",
    "DEFAULT_ESTIMATORS",
    "maximize",
    "solve_gr",
    "sandwich_covariance",
    "standard_errors",
    "wald_interval",
    "p_value",
    "coefficient_table",
    "covers",
    "EstimationService",
    "estimation_service",
]
