"""
Numerically Stable Primitives
Logistic and log-domain helpers used by every likelihood
"""

from typing import Union

import numpy as np
from scipy.special import expit as _expit, logit as _logit, log_expit as _log_expit, logsumexp

from core.errors import DomainError

ArrayLike = Union[float, np.ndarray]


def expit(z: ArrayLike) -> ArrayLike:
    """Logistic function; expit(-z) == 1 - expit(z) to machine precision"""
    return _expit(z)


def logit(p: ArrayLike) -> ArrayLike:
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)):
        raise DomainError("logit requires probabilities strictly inside (0, 1)", str(p))
    return _logit(p)


def log_expit(z: ArrayLike) -> ArrayLike:
    """log(expit(z)) without underflow for large negative z"""
    return _log_expit(z)


def log1m_expit(z: ArrayLike) -> ArrayLike:
    """log(1 - expit(z)) == log(expit(-z))"""
    return _log_expit(-np.asarray(z, dtype=float))


def log_sum_exp(values) -> float:
    """Overflow-safe log(sum(exp(values)))"""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("log_sum_exp of an empty vector is undefined")
    if arr.size == 1:
        return float(arr[0])
    return float(logsumexp(arr))
