"""
Sandwich Covariance
A^{-1} B A^{-T} with A the negative Hessian (or the estimating-equation
Jacobian, negated) and B the outer product of per-subject score contributions
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve, svd

from core.errors import NonIdentifiedError
from core.logger import logger

# Condition number above which the ridge is added before inverting
ILL_CONDITIONED = 1.0 / np.sqrt(np.finfo(float).eps)


def _inverse(matrix: np.ndarray, ridge: float) -> np.ndarray:
    """Inverse of A with a relative ridge for ill-conditioned (but full-rank) matrices"""
    P = matrix.shape[0]
    if not np.all(np.isfinite(matrix)):
        raise NonIdentifiedError(details="information matrix has non-finite entries")
    singular_values = svd(matrix, compute_uv=False)
    largest = singular_values[0] if P else 0.0
    if P and largest == 0.0:
        raise NonIdentifiedError(details="information matrix is zero")
    rank_tolerance = P * np.finfo(float).eps * largest
    if P and singular_values[-1] <= rank_tolerance:
        raise NonIdentifiedError(details=f"information matrix is rank deficient (smallest singular value "
                                         f"{singular_values[-1]:.3e})")

    if P and largest / singular_values[-1] > ILL_CONDITIONED:
        if ridge <= 0:
            raise NonIdentifiedError(details="information matrix is ill-conditioned and no ridge is allowed")
        logger.warning(f"Ill-conditioned information matrix; adding ridge {ridge:g} x largest singular value")
        matrix = matrix + ridge * largest * np.eye(P)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter('error', LinAlgWarning)
            return solve(matrix, np.eye(P))
    except (LinAlgError, LinAlgWarning) as e:
        raise NonIdentifiedError(details=str(e))


def sandwich_covariance(hessian_at_optimum, per_subject_scores, ridge_on_singular: float = 1e-8,
                        information=None) -> np.ndarray:
    """Robust covariance of an M-estimator.

    Args:
        hessian_at_optimum: (P, P) Hessian of the objective (or Jacobian of the
            estimating function); A = -hessian
        per_subject_scores: (n, P) score contributions s_i, B = sum_i s_i s_i'
        ridge_on_singular: relative ridge used when A is ill-conditioned
        information: optional A supplied directly (overrides -hessian)

    Returns:
        Symmetric (P, P) covariance matrix

    Raises:
        NonIdentifiedError: A is rank deficient
    """
    A = -np.asarray(hessian_at_optimum, dtype=float) if information is None else np.asarray(information, dtype=float)
    scores = np.asarray(per_subject_scores, dtype=float)
    A_inv = _inverse(A, ridge_on_singular)
    B = scores.T @ scores
    covariance = A_inv @ B @ A_inv.T
    return 0.5 * (covariance + covariance.T)


def standard_errors(covariance: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(np.diag(covariance), 0.0, None))
