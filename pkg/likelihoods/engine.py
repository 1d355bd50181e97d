"""
Risk-Set Engine
Generic log partial likelihood of the form

    sum over events i of  log N_i - log D_i,
    N_i = sum_k exp(numerator_ik),
    D_i = sum_c exp(weight_ic) * sum_{j in R_s(t_i)} exp(risk_jc),

where R_s(t) holds the subjects of event i's stratum with time >= t
(Breslow ties). Every estimator in this package is an instance: they only
differ in how the three sets of log terms are built.
"""

import numpy as np
from scipy.special import logsumexp

from .dataset import Dataset
from .types import LogTerms, ObjectiveEvaluation


def _outer(g: np.ndarray) -> np.ndarray:
    return g[..., :, None] * g[..., None, :]


def _suffix_sums(values: np.ndarray) -> np.ndarray:
    """Reverse cumulative sums along axis 0 with a trailing zero row"""
    out = np.zeros((values.shape[0] + 1,) + values.shape[1:])
    out[:-1] = np.cumsum(values[::-1], axis=0)[::-1]
    return out


def _prefix_sums(values: np.ndarray) -> np.ndarray:
    """Cumulative sums along axis 0 with a leading zero row"""
    out = np.zeros((values.shape[0] + 1,) + values.shape[1:])
    out[1:] = np.cumsum(values, axis=0)
    return out


def log_sum_terms(terms: LogTerms):
    """log sum_k exp(terms_k) per row, with gradient and Hessian"""
    if terms.values.shape[1] == 1:
        return terms.values[:, 0], terms.gradient[:, 0], terms.hessian[:, 0]
    log_total = logsumexp(terms.values, axis=1)
    with np.errstate(invalid='ignore'):
        weights = np.exp(terms.values - log_total[:, None])
    weights = np.nan_to_num(weights, nan=0.0)
    grad = np.einsum('mc,mcp->mp', weights, terms.gradient)
    hess = np.einsum('mc,mcpq->mpq', weights, terms.hessian + _outer(terms.gradient)) - _outer(grad)
    return log_total, grad, hess


def partial_log_likelihood(
    data: Dataset,
    events: np.ndarray,
    numerator: LogTerms,
    event_weights: LogTerms,
    subject_risks: LogTerms,
) -> ObjectiveEvaluation:
    """Evaluate the risk-set likelihood.

    Args:
        data: the sample
        events: rows contributing a term, sorted by (time, row)
        numerator: (m, K') log terms of each contributing event
        event_weights: (m, C) log weights of each denominator component at the event
        subject_risks: (n, C) log risk of every subject in each component

    Returns:
        ObjectiveEvaluation; per-subject scores are risk-set score residuals
        that sum exactly to the gradient
    """
    n = data.n
    n_params = numerator.gradient.shape[2]
    m = events.shape[0]

    log_num, grad_num, hess_num = log_sum_terms(numerator)

    log_den = np.zeros(m)
    grad_den = np.zeros((m, n_params))
    hess_den = np.zeros((m, n_params, n_params))
    scores = np.zeros((n, n_params))

    event_strata = data.stratum[events]
    for stratum in np.unique(event_strata):
        positions = np.flatnonzero(event_strata == stratum)
        rows = data.stratum_orders[int(stratum)]
        _stratum_denominator(
            data, events, positions, rows, event_weights, subject_risks,
            log_den, grad_den, hess_den, scores,
        )

    own = grad_num - grad_den
    scores[events] += own

    hessian = hess_num.sum(axis=0) - hess_den.sum(axis=0)
    return ObjectiveEvaluation(
        value=float(np.sum(log_num - log_den)),
        gradient=own.sum(axis=0),
        hessian=0.5 * (hessian + hessian.T),
        per_subject_scores=scores,
    )


def _stratum_denominator(data, events, positions, rows, event_weights, subject_risks,
                         log_den, grad_den, hess_den, scores) -> None:
    """Fill denominator terms for the events at `positions` and subtract risk-set shares from scores"""
    times = data.time[rows]
    risk = subject_risks.values[rows]
    risk_grad = subject_risks.gradient[rows]
    risk_hess = subject_risks.hessian[rows]

    # Shift each component by its largest log risk
    shift = np.max(np.where(np.isfinite(risk), risk, -np.inf), axis=0)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    scaled = np.exp(risk - shift[None, :])

    s0 = _suffix_sums(scaled)
    s1 = _suffix_sums(scaled[..., None] * risk_grad)
    s2 = _suffix_sums(scaled[..., None, None] * (risk_hess + _outer(risk_grad)))

    event_times = data.time[events[positions]]
    start = np.searchsorted(times, event_times, side='left')
    at_risk = s0[start]
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio1 = np.where(at_risk[..., None] > 0, s1[start] / at_risk[..., None], 0.0)
        ratio2 = np.where(at_risk[..., None, None] > 0, s2[start] / at_risk[..., None, None], 0.0)
        log_weight = event_weights.values[positions] + shift[None, :]
        log_component = log_weight + np.log(at_risk)

    log_d = logsumexp(log_component, axis=1)
    with np.errstate(invalid='ignore'):
        w = np.nan_to_num(np.exp(log_component - log_d[:, None]), nan=0.0)

    ga = event_weights.gradient[positions]
    ha = event_weights.hessian[positions]
    component_grad = ga + ratio1
    expected = np.einsum('mc,mcp->mp', w, component_grad)
    second = (ha + _outer(ga) + ga[..., :, None] * ratio1[..., None, :]
              + ratio1[..., :, None] * ga[..., None, :] + ratio2)
    hess = np.einsum('mc,mcpq->mpq', w, second) - _outer(expected)

    log_den[positions] = log_d
    grad_den[positions] = expected
    hess_den[positions] = hess

    # Risk-set shares: event i charges subject j (time_j >= t_i) with
    # exp(a_ic + r_jc - log D_i) * (grad a_ic + grad r_jc - E_i)
    with np.errstate(invalid='ignore'):
        share = np.nan_to_num(np.exp(log_weight - log_d[:, None]), nan=0.0)
    centered = share[..., None] * (ga - expected[:, None, :])
    cum_share = _prefix_sums(share)
    cum_centered = _prefix_sums(centered)
    seen = np.searchsorted(event_times, times, side='right')
    charge = (np.einsum('jc,jcp->jp', scaled, cum_centered[seen])
              + np.einsum('jc,jc,jcp->jp', scaled, cum_share[seen], risk_grad))
    scores[rows] -= charge

