"""
Term Builders
Log-scale pieces (alpha, beta'x, nu, pi) lifted into the full parameter space
"""

from typing import Tuple

import numpy as np

from model.baseline import BaselineRatioSpec
from model.missingness import MissingnessModel, logistic_terms
from model.nu import NuModel
from model.parameters import ParameterVector, beta_block
from .dataset import Dataset
from .types import LogTerms


def _n_params(theta: ParameterVector) -> int:
    return theta.layout.size


def linear_predictors(data: Dataset, theta: ParameterVector, n_subtypes: int) -> np.ndarray:
    """(n, K) matrix of beta_k' x_j"""
    return data.covariates @ theta.beta_matrix(n_subtypes).T


def subtype_risks(data: Dataset, theta: ParameterVector, n_subtypes: int) -> LogTerms:
    """Log risk beta_m' x_j of every subject in component m (n, K)"""
    P = _n_params(theta)
    values = linear_predictors(data, theta, n_subtypes)
    grad = np.zeros((data.n, n_subtypes, P))
    for k in range(1, n_subtypes + 1):
        grad[:, k - 1, theta.layout.slice(beta_block(k))] = data.covariates
    return LogTerms(values, grad, np.zeros((data.n, n_subtypes, P, P)))


def alpha_terms(data: Dataset, spec: BaselineRatioSpec, theta: ParameterVector, rows: np.ndarray) -> LogTerms:
    """log alpha_k(t_i) for the given rows, all k (m, K)"""
    P = _n_params(theta)
    m = rows.shape[0]
    K = spec.n_subtypes
    grad = np.zeros((m, K, P))
    hess = np.zeros((m, K, P, P))
    if spec.n_eta == 0:
        return LogTerms(np.zeros((m, K)), grad, hess)
    eta_slice = theta.layout.slice("eta")
    values, g, h = spec.log_alpha(theta.block("eta"), data.time[rows], data.stratum[rows])
    grad[:, :, eta_slice] = g
    hess[:, :, eta_slice, eta_slice] = h
    return LogTerms(values, grad, hess)


def covariate_terms(data: Dataset, theta: ParameterVector, n_subtypes: int, rows: np.ndarray) -> LogTerms:
    """beta_k' x_i for the given rows, all k (m, K)"""
    P = _n_params(theta)
    m = rows.shape[0]
    x = data.covariates[rows]
    values = x @ theta.beta_matrix(n_subtypes).T
    grad = np.zeros((m, n_subtypes, P))
    for k in range(1, n_subtypes + 1):
        grad[:, k - 1, theta.layout.slice(beta_block(k))] = x
    return LogTerms(values, grad, np.zeros((m, n_subtypes, P, P)))


def nu_terms(data: Dataset, nu: NuModel, theta: ParameterVector, rows: np.ndarray) -> LogTerms:
    """log nu_k(q_i) for the given event rows, all k (m, K)"""
    P = _n_params(theta)
    m = rows.shape[0]
    K = nu.n_subtypes
    psi_slice = theta.layout.slice("psi")
    table, g, h = nu.log_table_derivatives(theta.block("psi"))
    q = data.aux[rows]
    grad = np.zeros((m, K, P))
    hess = np.zeros((m, K, P, P))
    grad[:, :, psi_slice] = np.transpose(g[:, q, :], (1, 0, 2))
    hess[:, :, psi_slice, psi_slice] = np.transpose(h[:, q, :, :], (1, 0, 2, 3))
    return LogTerms(table[:, q].T, grad, hess)


def logistic_log_terms(design: np.ndarray, theta: ParameterVector) -> Tuple[LogTerms, LogTerms, np.ndarray]:
    """log pi and log(1 - pi) at each design row, as single-column LogTerms, plus pi itself"""
    P = _n_params(theta)
    m = design.shape[0]
    grad_pi = np.zeros((m, 1, P))
    grad_pibar = np.zeros((m, 1, P))
    hess = np.zeros((m, 1, P, P))
    if design.shape[1] == 0:
        # No terms: pi is 1/2 everywhere
        half = np.full((m, 1), np.log(0.5))
        return LogTerms(half, grad_pi, hess), LogTerms(half.copy(), grad_pibar, hess), np.full(m, 0.5)

    gamma_slice = theta.layout.slice("gamma")
    log_pi, log_pibar, pi = logistic_terms(design, theta.block("gamma"))
    grad_pi[:, 0, gamma_slice] = (1.0 - pi)[:, None] * design
    grad_pibar[:, 0, gamma_slice] = -pi[:, None] * design
    hess[:, 0, gamma_slice, gamma_slice] = -(pi * (1.0 - pi))[:, None, None] * (design[:, :, None] * design[:, None, :])
    return LogTerms(log_pi[:, None], grad_pi, hess), LogTerms(log_pibar[:, None], grad_pibar, hess), pi


def add(*parts: LogTerms) -> LogTerms:
    """Elementwise sum of log terms (products on the natural scale); broadcasts single columns"""
    values = sum(p.values for p in parts)
    gradient = sum(p.gradient for p in parts)
    hessian = sum(p.hessian for p in parts)
    return LogTerms(values, gradient, hessian)


def stack_rows(top: LogTerms, bottom: LogTerms, top_mask: np.ndarray) -> LogTerms:
    """Rows from `top` where top_mask else from `bottom` (same shapes)"""
    m = top_mask
    return LogTerms(
        np.where(m[:, None], top.values, bottom.values),
        np.where(m[:, None, None], top.gradient, bottom.gradient),
        np.where(m[:, None, None, None], top.hessian, bottom.hessian),
    )
