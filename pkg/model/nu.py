"""
Auxiliary Covariate Distribution
nu_k(q) = P(Q = q | Y = k) as a multinomial logit with level 0 as reference
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logsumexp, softmax

from core.errors import DomainError
from .numerics import logit


class NuModel(BaseModel):
    """Categorical-by-subtype model for the auxiliary covariate.

    psi is a K x (L - 1) matrix stored row-major (subtype k, level q >= 1);
    for binary Q this gives P(Q=1 | Y=k) = expit(psi_k).
    """
    model_config = ConfigDict(frozen=True)

    kind: str = Field(default="categorical_by_subtype", pattern="^categorical_by_subtype$")
    n_subtypes: int = Field(default=2, ge=1)
    aux_levels: int = Field(default=2, ge=2)
    psi: Optional[Tuple[float, ...]] = None

    @model_validator(mode='after')
    def validate_psi(self):
        if self.psi is not None and len(self.psi) != self.n_psi:
            raise ValueError(f"psi must have {self.n_psi} entries, got {len(self.psi)}")
        return self

    @classmethod
    def from_probabilities(cls, probabilities) -> "NuModel":
        """Build the model whose nu_k(q) equals probabilities[k-1, q]"""
        probs = np.asarray(probabilities, dtype=float)
        if probs.ndim != 2 or probs.shape[1] < 2:
            raise DomainError("probabilities must be a K x L matrix with L >= 2")
        if np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-10):
            raise DomainError("each row of probabilities must sum to 1")
        psi = logit_rows(probs)
        return cls(n_subtypes=probs.shape[0], aux_levels=probs.shape[1], psi=tuple(psi.ravel()))

    @property
    def n_psi(self) -> int:
        return self.n_subtypes * (self.aux_levels - 1)

    def psi_values(self) -> np.ndarray:
        if self.psi is None:
            return np.zeros(self.n_psi)
        return np.asarray(self.psi, dtype=float)

    def with_psi(self, psi) -> "NuModel":
        return self.model_copy(update={'psi': tuple(float(v) for v in np.asarray(psi).ravel())})

    def psi_labels(self) -> List[str]:
        return [f"nu[{k}]:q={q}" for k in range(1, self.n_subtypes + 1) for q in range(1, self.aux_levels)]

    def _logits(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        if psi.shape != (self.n_psi,):
            raise DomainError(f"psi must have length {self.n_psi}", f"got shape {psi.shape}")
        return np.hstack([np.zeros((self.n_subtypes, 1)), psi.reshape(self.n_subtypes, self.aux_levels - 1)])

    def log_table(self, psi) -> np.ndarray:
        """(K, L) matrix of log nu_k(q)"""
        logits = self._logits(psi)
        return logits - logsumexp(logits, axis=1, keepdims=True)

    def log_table_derivatives(self, psi) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """log nu_k(q) with gradient (K, L, n_psi) and Hessian (K, L, n_psi, n_psi) in psi"""
        K, L = self.n_subtypes, self.aux_levels
        logits = self._logits(psi)
        table = logits - logsumexp(logits, axis=1, keepdims=True)
        probs = softmax(logits, axis=1)

        grad = np.zeros((K, L, self.n_psi))
        hess = np.zeros((K, L, self.n_psi, self.n_psi))
        for k in range(K):
            block = slice(k * (L - 1), (k + 1) * (L - 1))
            p = probs[k, 1:]
            curvature = -(np.diag(p) - np.outer(p, p))
            for q in range(L):
                indicator = np.zeros(L - 1)
                if q > 0:
                    indicator[q - 1] = 1.0
                grad[k, q, block] = indicator - p
                hess[k, q, block, block] = curvature
        return table, grad, hess


def logit_rows(probabilities: np.ndarray) -> np.ndarray:
    """Multinomial logits of levels 1..L-1 against level 0, row by row"""
    probs = np.asarray(probabilities, dtype=float)
    if probs.shape[1] == 2:
        return np.asarray(logit(probs[:, 1]))[:, None]
    return np.log(probs[:, 1:]) - np.log(probs[:, :1])


def nu_eval(model: NuModel, k: int, q: int, x=None, t=None) -> float:
    """P(Q = q | Y = k); x and t are accepted for the general form but unused"""
    if not 1 <= k <= model.n_subtypes:
        raise DomainError(f"subtype {k} outside 1..{model.n_subtypes}")
    if not 0 <= q < model.aux_levels:
        raise DomainError(f"aux level {q} outside 0..{model.aux_levels - 1}")
    return float(np.exp(model.log_table(model.psi_values())[k - 1, q]))
