"""
Informative Partial Likelihoods
L* (no auxiliary information), L*_Q = L*_Q1 x L*_Q2 and the NMAR likelihood L*_Y.

All share the denominator  sum_{j at risk} sum_m alpha_m(t_i) exp(beta_m' x_j)
and differ in the numerators of observed-subtype and missing-subtype events.
"""

from typing import Optional, Union

import numpy as np

from core.errors import ConfigurationError, DataError, FitError
from model.baseline import BaselineRatioSpec
from model.missingness import MissingnessKind, MissingnessModel
from model.nu import NuModel
from model.parameters import ParameterLayout, ParameterVector
from .dataset import Dataset
from .engine import partial_log_likelihood
from .terms import add, alpha_terms, covariate_terms, logistic_log_terms, nu_terms, stack_rows, subtype_risks
from .types import LogTerms, ObjectiveEvaluation


def _check_dimensions(data: Dataset, spec: BaselineRatioSpec) -> None:
    if data.n_subtypes > spec.n_subtypes:
        raise ConfigurationError(f"data has {data.n_subtypes} subtypes, model has {spec.n_subtypes}")
    if data.num_strata > spec.num_strata:
        raise ConfigurationError(f"data has {data.num_strata} strata, model has {spec.num_strata}")


def _missingness_terms(data: Dataset, miss: MissingnessModel, theta: ParameterVector,
                       events: np.ndarray, n_subtypes: int):
    """(log pi, log pi-bar) at each event for every candidate subtype, (m, K) each"""
    t = data.time[events]
    x = data.covariates[events]
    q = data.aux[events] if miss.uses_q else None
    if not miss.uses_y:
        log_pi, log_pibar, _ = logistic_log_terms(miss.design(t, x, q=q), theta)
        return log_pi, log_pibar
    per_k = [logistic_log_terms(miss.design(t, x, y=np.full(events.shape[0], k)), theta)
             for k in range(1, n_subtypes + 1)]
    log_pi = LogTerms(*(np.concatenate([getattr(p[0], f) for p in per_k], axis=1)
                        for f in ('values', 'gradient', 'hessian')))
    log_pibar = LogTerms(*(np.concatenate([getattr(p[1], f) for p in per_k], axis=1)
                           for f in ('values', 'gradient', 'hessian')))
    return log_pi, log_pibar


def joint_partial_likelihood(
    data: Dataset,
    spec: BaselineRatioSpec,
    theta: ParameterVector,
    nu: Optional[NuModel] = None,
    miss: Optional[MissingnessModel] = None,
) -> ObjectiveEvaluation:
    """Shared builder for L*, L*_Q2, L*_Q and L*_Y.

    Observed-subtype event i contributes the y_i candidate of
    [pi(.)] [nu_k(q_i)] alpha_k(t_i) exp(beta_k' x_i); missing-subtype events
    sum the candidates over k with pi-bar in place of pi. Bracketed factors
    are present only when the corresponding model is given.
    """
    _check_dimensions(data, spec)
    K = spec.n_subtypes
    events = data.event_order
    if events.size == 0:
        raise FitError("no usable events", "the dataset has no events")
    if nu is not None or (miss is not None and miss.uses_q):
        data.require_aux_on_events()

    alpha = alpha_terms(data, spec, theta, events)
    parts = [alpha, covariate_terms(data, theta, K, events)]
    if nu is not None:
        parts.append(nu_terms(data, nu, theta, events))
    candidates = add(*parts)

    observed = data.subtype_observed[events]
    if miss is not None:
        log_pi, log_pibar = _missingness_terms(data, miss, theta, events, K)
        candidates = stack_rows(add(candidates, log_pi), add(candidates, log_pibar), observed)

    # Observed-subtype events keep only their own subtype's candidate
    own_subtype = data.subtype[events][:, None] == np.arange(1, K + 1)[None, :]
    numerator = candidates.masked(observed[:, None] & ~own_subtype)

    return partial_log_likelihood(data, events, numerator, alpha, subtype_risks(data, theta, K))


def loglik_Lstar(data: Dataset, spec: BaselineRatioSpec, theta: ParameterVector) -> ObjectiveEvaluation:
    """log L*: the joint partial likelihood without auxiliary information (nu = 1)"""
    return joint_partial_likelihood(data, spec, theta)


def loglik_LstarQ2(data: Dataset, spec: BaselineRatioSpec, nu: NuModel, theta: ParameterVector) -> ObjectiveEvaluation:
    """log L*_Q2 in (beta, eta, psi); never reads a missingness model"""
    if nu.n_subtypes != spec.n_subtypes:
        raise ConfigurationError("nu model and baseline spec disagree on the number of subtypes")
    data.require_aux_on_events()
    _check_aux_levels(data, nu)
    return joint_partial_likelihood(data, spec, theta, nu=nu)


def loglik_LstarQ(data: Dataset, spec: BaselineRatioSpec, nu: NuModel, miss: MissingnessModel,
                  theta: ParameterVector) -> ObjectiveEvaluation:
    """log L*_Q computed directly, pi(t, x, q) and nu in the numerators"""
    _require_q_kind(miss)
    data.require_aux_on_events()
    _check_aux_levels(data, nu)
    return joint_partial_likelihood(data, spec, theta, nu=nu, miss=miss)


def loglik_LstarY(data: Dataset, spec: BaselineRatioSpec, miss: MissingnessModel,
                  theta: ParameterVector) -> ObjectiveEvaluation:
    """log L*_Y in (beta, eta, gamma); pi may depend on the true subtype"""
    if miss.uses_q:
        raise ConfigurationError("L*_Y missingness model cannot reference the auxiliary covariate",
                                 f"kind={miss.kind.value}")
    if miss.uses_y and miss.n_subtypes != spec.n_subtypes:
        raise ConfigurationError("missingness model and baseline spec disagree on the number of subtypes")
    return joint_partial_likelihood(data, spec, theta, miss=miss)


def loglik_LstarQ1(data: Dataset, miss: MissingnessModel,
                   theta: Union[ParameterVector, np.ndarray]) -> ObjectiveEvaluation:
    """Bernoulli log-likelihood of subtype observation among events.

    Diagnostic for the missingness model; the regression parameters never
    enter it. theta may be a bare gamma vector or any layout with a gamma
    block.
    """
    _require_q_kind(miss)
    if not isinstance(theta, ParameterVector):
        theta = ParameterVector(theta, ParameterLayout((("gamma", miss.n_gamma),)))
    P = theta.layout.size
    events = data.event_order
    if miss.uses_q:
        data.require_aux_on_events()
        _check_aux_levels(data, miss)
    scores = np.zeros((data.n, P))
    if events.size == 0 or miss.n_gamma == 0:
        value = float(events.size * np.log(0.5))
        return ObjectiveEvaluation(value, np.zeros(P), np.zeros((P, P)), scores)

    design = miss.design(data.time[events], data.covariates[events],
                         q=data.aux[events] if miss.uses_q else None)
    log_pi, log_pibar, pi = logistic_log_terms(design, theta)
    observed = data.subtype_observed[events]
    value = float(np.sum(np.where(observed, log_pi.values[:, 0], log_pibar.values[:, 0])))

    gamma_slice = theta.layout.slice("gamma")
    residual = (observed.astype(float) - pi)[:, None] * design
    scores[events, gamma_slice] = residual
    hessian = np.zeros((P, P))
    hessian[gamma_slice, gamma_slice] = -(design * (pi * (1.0 - pi))[:, None]).T @ design
    return ObjectiveEvaluation(value, scores.sum(axis=0), hessian, scores)


def _require_q_kind(miss: MissingnessModel) -> None:
    if miss.kind not in (MissingnessKind.LOGISTIC_Q, MissingnessKind.LOGISTIC_TXQ):
        raise ConfigurationError("missingness model must be logistic in q or in (t, x, q)",
                                 f"kind={miss.kind.value}")


def _check_aux_levels(data: Dataset, model) -> None:
    if data.aux_levels > model.aux_levels:
        raise DataError(f"aux takes {data.aux_levels} levels, model allows {model.aux_levels}")
