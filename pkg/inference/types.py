"""
Inference Types and Data Classes
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.config import settings
from model.baseline import BaselineRatioSpec
from model.missingness import MissingnessModel
from model.parameters import ParameterVector, beta_block


class FitOptions(BaseModel):
    """Numeric knobs for Newton-Raphson and the GR root finder (defaults from config.json)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    max_iterations: int = Field(default_factory=lambda: settings.fitting.max_iterations, ge=1)
    gradient_tolerance: float = Field(default_factory=lambda: settings.fitting.gradient_tolerance, gt=0)
    step_halving_max: int = Field(default_factory=lambda: settings.fitting.step_halving_max, ge=0)
    ridge_on_singular: float = Field(default_factory=lambda: settings.fitting.ridge_on_singular, ge=0)
    beta_guard: float = Field(default_factory=lambda: settings.fitting.beta_guard, gt=0)
    initial_values: Optional[ParameterVector] = None
    jacobian: str = Field(default="analytic", pattern="^(analytic|numeric)$")


class ModelSpecification(BaseModel):
    """Everything besides the data that an estimator needs"""
    model_config = ConfigDict(frozen=True)

    alpha: BaselineRatioSpec = BaselineRatioSpec()
    aux_levels: int = Field(default=2, ge=2)
    ly_missingness: Optional[MissingnessModel] = None
    gr_missingness: Optional[MissingnessModel] = None
    cca_drop_rows: bool = False

    @property
    def n_subtypes(self) -> int:
        return self.alpha.n_subtypes


@dataclass(frozen=True)
class FitResult:
    """Point estimates with sandwich covariance and convergence diagnostics"""
    estimate: ParameterVector
    covariance: np.ndarray
    standard_errors: np.ndarray
    log_likelihood: Optional[float]
    iterations: int
    converged: bool
    gradient_norm: float
    message: str = ""
    estimator: str = ""
    n_subtypes: int = 1
    covariate_names: Tuple[str, ...] = ()
    history: Tuple[float, ...] = ()
    information: Optional[np.ndarray] = field(default=None, repr=False)
    per_subject_scores: Optional[np.ndarray] = field(default=None, repr=False)

    def beta(self, k: int) -> np.ndarray:
        return self.estimate.block(beta_block(k))

    def beta_standard_errors(self, k: int) -> np.ndarray:
        return self.standard_errors[self.estimate.layout.slice(beta_block(k))]

    def as_dict(self) -> Dict[str, object]:
        return {
            'estimator': self.estimator,
            'converged': self.converged,
            'iterations': self.iterations,
            'gradient_norm': self.gradient_norm,
            'log_likelihood': self.log_likelihood,
            'message': self.message,
            'estimate': self.estimate.as_dict(),
            'standard_errors': dict(zip(self.estimate.layout.labels, map(float, self.standard_errors))),
        }
