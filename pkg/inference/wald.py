"""
Wald Inference
Normal-approximation confidence intervals, p-values and coefficient tables
"""

from typing import Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from core.errors import DomainError


def _critical_value(level: float) -> float:
    if not 0 < level < 1:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    return float(norm.ppf(0.5 + level / 2.0))


def wald_interval(estimate, standard_error, level: float = 0.95) -> Tuple:
    """estimate -/+ z_{1 - alpha/2} * se (scalars or arrays)"""
    z = _critical_value(level)
    estimate = np.asarray(estimate, dtype=float)
    standard_error = np.asarray(standard_error, dtype=float)
    lower = estimate - z * standard_error
    upper = estimate + z * standard_error
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


def p_value(estimate, standard_error):
    """Two-sided normal p-value for H0: parameter = 0"""
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.abs(np.asarray(estimate, dtype=float)) / np.asarray(standard_error, dtype=float)
    p = 2.0 * norm.sf(z)
    return float(p) if np.ndim(p) == 0 else p


def coefficient_table(fit, level: float = 0.95) -> pd.DataFrame:
    """One row per subtype and covariate: estimate, exp(estimate), SE, Wald CI, p-value"""
    rows = []
    for k in range(1, fit.n_subtypes + 1):
        estimates = fit.beta(k)
        errors = fit.beta_standard_errors(k)
        lower, upper = wald_interval(estimates, errors, level)
        p = p_value(estimates, errors)
        for j, name in enumerate(fit.covariate_names):
            rows.append({
                'subtype': k,
                'covariate': name,
                'estimate': float(estimates[j]),
                'hazard_ratio': float(np.exp(estimates[j])),
                'std_error': float(errors[j]),
                'ci_lower': float(lower[j]),
                'ci_upper': float(upper[j]),
                'p_value': float(p[j]),
            })
    return pd.DataFrame(rows, columns=['subtype', 'covariate', 'estimate', 'hazard_ratio', 'std_error',
                                       'ci_lower', 'ci_upper', 'p_value'])


def covers(fit, k: int, truth, level: float = 0.95) -> np.ndarray:
    """Whether each beta_k interval contains the true value"""
    lower, upper = wald_interval(fit.beta(k), fit.beta_standard_errors(k), level)
    truth = np.asarray(truth, dtype=float)
    return (lower <= truth) & (truth <= upper)

