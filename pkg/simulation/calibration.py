"""
Baseline Level Calibration
Root finding on log c so that the expected censoring fraction hits a target,
using common random numbers across candidates
"""

import math

import numpy as np
from scipy.optimize import brentq

from core.errors import ConfigurationError
from core.logger import context_logger
from .generator import invert_cumulative_hazard
from .scenario import Scenario


def censoring_fraction(scenario: Scenario, level: float, x: np.ndarray, exposure: np.ndarray,
                       censor_time: np.ndarray) -> float:
    candidate = scenario.model_copy(update={'baseline_level': level})
    event_time = invert_cumulative_hazard(candidate, x, exposure)
    return float(np.mean(event_time > censor_time))


def calibrate_baseline_level(scenario: Scenario, target: float = 0.70, n: int = 200000, seed: int = 0,
                             lower: float = 1e-7, upper: float = 10.0, tolerance: float = 1e-10) -> float:
    """
    Baseline level c whose censoring fraction equals target

    The censoring fraction decreases in c, so a bracketed root search on
    log c over [lower, upper] converges; the same draws are reused for every
    candidate.

    Raises:
        ConfigurationError: target outside (0, 1), censoring disabled, or no root in the bracket
    """
    if not 0.0 < target < 1.0:
        raise ConfigurationError("calibration target must lie strictly between 0 and 1", f"got {target}",
                                 field="target")
    if not scenario.censoring.enabled:
        raise ConfigurationError("cannot calibrate a censoring fraction with censoring disabled",
                                 field="censoring.enabled")

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    x = (rng.random(n) < scenario.covariate_prevalence).astype(float)
    exposure = rng.standard_exponential(n)
    censor_time = np.minimum(rng.exponential(scenario.censoring.exponential_mean, n),
                             scenario.censoring.admin_time)

    def excess(log_level: float) -> float:
        return censoring_fraction(scenario, math.exp(log_level), x, exposure, censor_time) - target

    low, high = math.log(lower), math.log(upper)
    if not excess(low) > 0.0 > excess(high):
        raise ConfigurationError("calibration target is not bracketed",
                                 f"search range [{lower:g}, {upper:g}]", field="target")
    level = math.exp(brentq(excess, low, high, xtol=tolerance))
    context_logger.info("Calibrated baseline level", level=f"{level:.6g}", target=target, draws=n)
    return level
