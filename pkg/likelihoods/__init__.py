"""
Likelihoods Module
Partial log-likelihoods and estimating equations with analytic derivatives:
complete-case (CCA), L*, L*_Q1, L*_Q2, L*_Q, L*_Y and Goetghebeur-Ryan (GR)
"""

from .dataset import Dataset
from .types import EstimatingEquations, LogTerms, ObjectiveEvaluation
from .complete_case import loglik_cca
from .informative import loglik_Lstar, loglik_LstarQ, loglik_LstarQ1, loglik_LstarQ2, loglik_LstarY
from .goetghebeur_ryan import gr_system, loglik_gr_L

__all__ = [
    "Dataset",
    "EstimatingEquations",
    "LogTerms",
    "ObjectiveEvaluation",
    "loglik_cca",
    "loglik_Lstar",
    "loglik_LstarQ",
    "loglik_LstarQ1",
    "loglik_LstarQ2",
    "loglik_LstarY",
    "gr_system",
    "loglik_gr_L",
]
