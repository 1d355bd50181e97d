"""
Data Generator
Two-subtype proportional hazards data with a binary covariate, independent
censoring, a case-only auxiliary covariate and subtype missingness
"""

import numpy as np

from likelihoods.dataset import Dataset, NO_AUX, NO_SUBTYPE
from .mechanisms import observation_probabilities
from .scenario import Scenario


def cumulative_hazard(scenario: Scenario, t, x) -> np.ndarray:
    """All-cause Lambda(t | x) = c e^{b1 x} t + c e1 e^{b2 x} t^{e2+1} / (e2+1)"""
    b1, b2 = scenario.true_beta
    e1, e2 = scenario.true_eta
    c = scenario.baseline_level
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return c * np.exp(b1 * x) * t + c * e1 * np.exp(b2 * x) * t ** (e2 + 1.0) / (e2 + 1.0)


def subtype_two_probability(scenario: Scenario, t, x) -> np.ndarray:
    """lambda_2 / (lambda_1 + lambda_2) at time t"""
    b1, b2 = scenario.true_beta
    e1, e2 = scenario.true_eta
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    second = e1 * np.exp(b2 * x) * t ** e2
    return second / (np.exp(b1 * x) + second)


def invert_cumulative_hazard(scenario: Scenario, x: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Solve Lambda(t | x) = target elementwise"""
    b1, b2 = scenario.true_beta
    e1, e2 = scenario.true_eta
    c = scenario.baseline_level
    a = c * e1 * np.exp(b2 * x) / 2.0
    b = c * np.exp(b1 * x)
    if e2 == 1.0:
        # Stable root of a t^2 + b t - E = 0
        return 2.0 * target / (b + np.sqrt(b * b + 4.0 * a * target))

    # Lambda is increasing in t: bisection on a bracket doubled until it covers the target
    lower = np.zeros_like(target)
    upper = np.maximum(target / b, 1.0)
    while True:
        short = cumulative_hazard(scenario, upper, x) < target
        if not np.any(short):
            break
        upper = np.where(short, upper * 2.0, upper)
    for _ in range(200):
        middle = 0.5 * (lower + upper)
        below = cumulative_hazard(scenario, middle, x) < target
        lower = np.where(below, middle, lower)
        upper = np.where(below, upper, middle)
    return 0.5 * (lower + upper)


def generate_dataset(scenario: Scenario, rng: np.random.Generator) -> Dataset:
    """
    Draw one simulated sample

    Every stream below is drawn for all n subjects in a fixed order so the
    same generator state always yields the same dataset.

    Args:
        scenario: design and true parameters
        rng: numpy Generator owned by this replication

    Returns:
        Dataset with one covariate column "x"
    """
    n = scenario.n
    x = (rng.random(n) < scenario.covariate_prevalence).astype(float)
    event_time = invert_cumulative_hazard(scenario, x, rng.standard_exponential(n))
    subtype = np.where(rng.random(n) < subtype_two_probability(scenario, event_time, x), 2, 1)

    censoring_draw = rng.exponential(scenario.censoring.exponential_mean, n)
    if scenario.censoring.enabled:
        censor_time = np.minimum(censoring_draw, scenario.censoring.admin_time)
    else:
        censor_time = np.full(n, np.inf)
    event = event_time <= censor_time
    time = np.where(event, event_time, censor_time)

    q_prob = np.asarray(scenario.q_dist, dtype=float)[subtype - 1]
    aux = (rng.random(n) < q_prob).astype(np.int64)

    observe_draw = rng.random(n)
    pi = observation_probabilities(scenario.mechanism, time, x[:, None], aux, subtype)
    observed = event & (observe_draw < pi)

    return Dataset(
        time=time,
        event=event,
        covariates=x[:, None],
        subtype_observed=observed,
        subtype=np.where(observed, subtype, NO_SUBTYPE),
        aux=np.where(event, aux, NO_AUX),
        stratum=np.zeros(n, dtype=np.int64),
        n_subtypes=2,
        covariate_names=("x",),
    )
