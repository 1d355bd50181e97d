"""
Model Core Module
Statistical model objects: subject records, baseline hazard ratios,
the auxiliary-covariate distribution and subtype missingness models
"""

from .numerics import expit, logit, log_sum_exp
from .records import SubjectRecord, record_violations
from .baseline import AlphaForm, BaselineRatioSpec, alpha_eval, relative_hazard
from .nu import NuModel, nu_eval
from .missingness import MissingnessKind, MissingnessModel, pi_eval
from .parameters import ParameterLayout, ParameterVector, beta_block

__all__ = [
    "expit",
    "logit",
    "log_sum_exp",
    "SubjectRecord",
    "record_violations",
    "AlphaForm",
    "BaselineRatioSpec",
    "alpha_eval",
    "relative_hazard",
    "NuModel",
    "nu_eval",
    "MissingnessKind",
    "MissingnessModel",
    "pi_eval",
    "ParameterLayout",
    "ParameterVector",
    "beta_block",
]
