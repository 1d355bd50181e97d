"""
Likelihood Result Types
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class LogTerms:
    """Log-scale terms with derivatives in the full parameter vector.

    values (m, C), gradient (m, C, P), hessian (m, C, P, P). Entries whose
    value is -inf must carry zero derivatives.
    """
    values: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def zeros(cls, m: int, c: int, n_params: int) -> "LogTerms":
        return cls(np.zeros((m, c)), np.zeros((m, c, n_params)), np.zeros((m, c, n_params, n_params)))

    def masked(self, mask: np.ndarray) -> "LogTerms":
        """Set masked (m, C) entries to -inf with zero derivatives"""
        values = np.where(mask, -np.inf, self.values)
        gradient = np.where(mask[..., None], 0.0, self.gradient)
        hessian = np.where(mask[..., None, None], 0.0, self.hessian)
        return LogTerms(values, gradient, hessian)


@dataclass(frozen=True)
class ObjectiveEvaluation:
    """Value, gradient, Hessian and per-subject score contributions of a log-likelihood"""
    value: Optional[float]
    gradient: np.ndarray
    hessian: np.ndarray
    per_subject_scores: np.ndarray

    def __add__(self, other: "ObjectiveEvaluation") -> "ObjectiveEvaluation":
        return ObjectiveEvaluation(
            value=None if self.value is None or other.value is None else self.value + other.value,
            gradient=self.gradient + other.gradient,
            hessian=self.hessian + other.hessian,
            per_subject_scores=self.per_subject_scores + other.per_subject_scores,
        )

    @property
    def is_finite(self) -> bool:
        return (self.value is None or np.isfinite(self.value)) and bool(np.all(np.isfinite(self.gradient)))


@dataclass(frozen=True)
class EstimatingEquations:
    """Stacked estimating functions U(theta), their Jacobian and per-subject contributions"""
    residual: np.ndarray
    jacobian: np.ndarray
    per_subject_scores: np.ndarray

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.residual)) and np.all(np.isfinite(self.jacobian)))
