"""
Goetghebeur-Ryan Estimating Equations
Score for beta from the missingness-weighted likelihood L, score for eta from L*,
and the Bernoulli score for gamma, stacked into one system.
"""

from typing import Tuple

import numpy as np

from core.errors import ConfigurationError, FitError
from model.baseline import BaselineRatioSpec
from model.missingness import MissingnessModel
from model.parameters import ParameterVector, beta_block
from .dataset import Dataset
from .engine import partial_log_likelihood
from .informative import loglik_Lstar, loglik_LstarQ1
from .terms import add, alpha_terms, covariate_terms, logistic_log_terms, stack_rows
from .types import EstimatingEquations, LogTerms, ObjectiveEvaluation


def _require_tx_model(miss: MissingnessModel) -> None:
    if not miss.depends_on_time_x_only:
        raise ConfigurationError("GR requires a missingness model in (t, x) only",
                                 f"kind={miss.kind.value}, q_terms={miss.q_terms}, y_terms={miss.y_terms}")


def _component(observed: int, time_bin: int, k: int, n_bins: int, K: int) -> int:
    """Denominator component for (observed flag, time bin, subtype)"""
    return ((1 - observed) * n_bins + time_bin) * K + (k - 1)


def loglik_gr_L(data: Dataset, spec: BaselineRatioSpec, miss: MissingnessModel,
                theta: ParameterVector) -> ObjectiveEvaluation:
    """log L with pi evaluated at the event time for everyone in the risk set.

    Observed-subtype event i:
        pi(t_i, x_i) e^{beta_y' x_i} / sum_j pi(t_i, x_j) e^{beta_y' x_j}
    Missing-subtype event i:
        pi-bar(t_i, x_i) sum_k alpha_k e^{beta_k' x_i}
        / sum_j pi-bar(t_i, x_j) sum_m alpha_m(t_i) e^{beta_m' x_j}

    pi(t_i, x_j) only depends on t_i through its time bin, so the denominator
    components are indexed by (observed flag, bin, subtype).
    """
    _require_tx_model(miss)
    K = spec.n_subtypes
    events = data.event_order
    if events.size == 0:
        raise FitError("no usable events", "the dataset has no events")
    m = events.size
    P = theta.layout.size
    n_bins = miss.n_time_bins
    observed = data.subtype_observed[events]
    event_bins = miss.time_bin(data.time[events])

    # Numerators
    alpha = alpha_terms(data, spec, theta, events)
    linear = covariate_terms(data, theta, K, events)
    log_pi, log_pibar, _ = logistic_log_terms(miss.design(data.time[events], data.covariates[events]), theta)
    obs_num = add(linear, log_pi)
    mis_num = add(linear, alpha, log_pibar)
    own_subtype = data.subtype[events][:, None] == np.arange(1, K + 1)[None, :]
    numerator = stack_rows(obs_num, mis_num, observed).masked(observed[:, None] & ~own_subtype)

    # Event weights: indicator of the event's own component, alpha_m for missing-subtype events
    C = 2 * n_bins * K
    w_values = np.full((m, C), -np.inf)
    w_grad = np.zeros((m, C, P))
    w_hess = np.zeros((m, C, P, P))
    rows = np.arange(m)
    obs_rows = rows[observed]
    w_values[obs_rows, _component(1, event_bins[obs_rows], data.subtype[events][obs_rows], n_bins, K)] = 0.0
    mis_rows = rows[~observed]
    for k in range(1, K + 1):
        c = _component(0, event_bins[mis_rows], k, n_bins, K)
        w_values[mis_rows, c] = alpha.values[mis_rows, k - 1]
        w_grad[mis_rows, c] = alpha.gradient[mis_rows, k - 1]
        w_hess[mis_rows, c] = alpha.hessian[mis_rows, k - 1]
    weights = LogTerms(w_values, w_grad, w_hess)

    # Subject risks per component
    n = data.n
    r_values = np.zeros((n, C))
    r_grad = np.zeros((n, C, P))
    r_hess = np.zeros((n, C, P, P))
    lp = data.covariates @ theta.beta_matrix(K).T
    for b in range(n_bins):
        pi_b, pibar_b, _ = logistic_log_terms(miss.design_at_bins(data.covariates, b), theta)
        for flag, part in ((1, pi_b), (0, pibar_b)):
            for k in range(1, K + 1):
                c = _component(flag, b, k, n_bins, K)
                r_values[:, c] = part.values[:, 0] + lp[:, k - 1]
                r_grad[:, c] = part.gradient[:, 0]
                r_grad[:, c, theta.layout.slice(beta_block(k))] += data.covariates
                r_hess[:, c] = part.hessian[:, 0]
    risks = LogTerms(r_values, r_grad, r_hess)

    return partial_log_likelihood(data, events, numerator, weights, risks)


def _block_indices(theta: ParameterVector, K: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    layout = theta.layout
    beta = np.concatenate([layout.indices(beta_block(k)) for k in range(1, K + 1)])
    eta = layout.indices("eta") if layout.has("eta") else np.zeros(0, dtype=int)
    gamma = layout.indices("gamma") if layout.has("gamma") else np.zeros(0, dtype=int)
    return beta, eta, gamma


def gr_system(data: Dataset, spec: BaselineRatioSpec, miss: MissingnessModel, theta: ParameterVector,
              jacobian: str = "analytic") -> EstimatingEquations:
    """Stacked estimating equations U(beta, eta, gamma).

    Rows: d log L / d beta, d log L* / d eta, d log Bernoulli(O | t, x) / d gamma.
    The Jacobian is assembled from the analytic Hessians of the three
    objectives; jacobian="numeric" uses central differences of the residual.
    """
    _require_tx_model(miss)
    K = spec.n_subtypes
    beta_rows, eta_rows, gamma_rows = _block_indices(theta, K)

    L = loglik_gr_L(data, spec, miss, theta)
    L_star = loglik_Lstar(data, spec, theta)
    bernoulli = loglik_LstarQ1(data, miss, theta)

    P = theta.layout.size
    residual = np.zeros(P)
    jac = np.zeros((P, P))
    scores = np.zeros((data.n, P))
    for rows, source in ((beta_rows, L), (eta_rows, L_star), (gamma_rows, bernoulli)):
        residual[rows] = source.gradient[rows]
        jac[rows] = source.hessian[rows]
        scores[:, rows] = source.per_subject_scores[:, rows]

    if jacobian == "numeric":
        jac = numeric_jacobian(lambda values: gr_system(data, spec, miss, theta.with_values(values)).residual,
                               theta.values)
    elif jacobian != "analytic":
        raise ConfigurationError(f"unknown jacobian mode '{jacobian}'")

    return EstimatingEquations(residual, jac, scores)


def numeric_jacobian(residual_fn, values: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-6 * max(1, |theta_j|)"""
    values = np.asarray(values, dtype=float)
    P = values.size
    jac = np.zeros((P, P))
    for j in range(P):
        step = 1e-6 * max(1.0, abs(values[j]))
        up = values.copy()
        down = values.copy()
        up[j] += step
        down[j] -= step
        jac[:, j] = (residual_fn(up) - residual_fn(down)) / (2 * step)
    return jac
