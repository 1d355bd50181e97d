"""
Complete-Case Analysis
Cause-specific Cox partial likelihood over events with an observed subtype
"""

import numpy as np

from core.errors import FitError
from model.baseline import BaselineRatioSpec
from model.parameters import ParameterVector
from .dataset import Dataset
from .engine import partial_log_likelihood
from .terms import covariate_terms, subtype_risks
from .types import LogTerms, ObjectiveEvaluation


def loglik_cca(data: Dataset, spec: BaselineRatioSpec, theta: ParameterVector,
               drop_rows: bool = False) -> ObjectiveEvaluation:
    """Sum over observed-subtype events of beta_y' x_i - log sum_{j at risk} exp(beta_y' x_j).

    The baseline ratios cancel from every term, so only the beta blocks of
    theta are read. Events with a missing subtype stay in the risk sets as
    censored observations unless drop_rows removes them entirely.
    """
    if drop_rows:
        data = data.drop_missing_subtype_rows()
    K = spec.n_subtypes
    events = data.event_order[data.subtype_observed[data.event_order]]
    if events.size == 0:
        raise FitError("no usable events", "no event has an observed subtype")

    own_subtype = data.subtype[events][:, None] == np.arange(1, K + 1)[None, :]
    numerator = covariate_terms(data, theta, K, events).masked(~own_subtype)

    P = theta.layout.size
    weights = LogTerms.zeros(events.size, K, P).masked(~own_subtype)
    return partial_log_likelihood(data, events, numerator, weights, subtype_risks(data, theta, K))
