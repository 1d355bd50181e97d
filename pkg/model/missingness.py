"""
Subtype Missingness Models
pi = P(O = 1 | t, x, q or y) as a logistic regression on named terms
"""

import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import DomainError
from .numerics import expit, log_expit, log1m_expit


class MissingnessKind(str, Enum):
    LOGISTIC_Q = "logistic_q"
    LOGISTIC_TXQ = "logistic_txq"
    LOGISTIC_TXY = "logistic_txy"


class MissingnessModel(BaseModel):
    """Logistic model for observing the subtype of an event.

    Design columns, in order: intercept, q indicators (q = 1..L-1),
    y indicators (y = 2..K), covariate columns, time indicators I{t > c}.
    """
    model_config = ConfigDict(frozen=True)

    kind: MissingnessKind = MissingnessKind.LOGISTIC_TXQ
    intercept: bool = True
    q_terms: bool = False
    aux_levels: int = Field(default=2, ge=2)
    y_terms: bool = False
    n_subtypes: int = Field(default=2, ge=1)
    x_columns: Tuple[int, ...] = ()
    time_cuts: Tuple[float, ...] = ()
    gamma: Optional[Tuple[float, ...]] = None

    @field_validator('time_cuts')
    @classmethod
    def validate_time_cuts(cls, v):
        values = tuple(float(c) for c in v)
        if any(not math.isfinite(c) for c in values):
            raise ValueError("time cut points must be finite")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("time cut points must be strictly increasing")
        return values

    @model_validator(mode='after')
    def validate_kind(self):
        if self.kind == MissingnessKind.LOGISTIC_Q:
            if self.x_columns or self.time_cuts or self.y_terms:
                raise ValueError("logistic_q depends on q only")
            if not self.q_terms:
                raise ValueError("logistic_q needs q terms")
        elif self.kind == MissingnessKind.LOGISTIC_TXQ:
            if self.y_terms:
                raise ValueError("logistic_txq cannot reference the subtype")
        elif self.kind == MissingnessKind.LOGISTIC_TXY:
            if self.q_terms:
                raise ValueError("logistic_txy cannot reference the auxiliary covariate")
        if any(c < 0 for c in self.x_columns):
            raise ValueError("covariate columns must be nonnegative indices")
        if self.gamma is not None and len(self.gamma) != self.n_gamma:
            raise ValueError(f"gamma must have {self.n_gamma} entries, got {len(self.gamma)}")
        return self

    # Constructors for the models used in practice

    @classmethod
    def logistic_q(cls, aux_levels: int = 2, intercept: bool = True, gamma=None) -> "MissingnessModel":
        return cls(kind=MissingnessKind.LOGISTIC_Q, intercept=intercept, q_terms=True,
                   aux_levels=aux_levels, gamma=_as_tuple(gamma))

    @classmethod
    def logistic_tx(cls, x_columns: Sequence[int] = (0,), time_cuts: Sequence[float] = (),
                    intercept: bool = True, gamma=None) -> "MissingnessModel":
        """The (t, x)-only model under which the GR equations are valid"""
        return cls(kind=MissingnessKind.LOGISTIC_TXQ, intercept=intercept, q_terms=False,
                   x_columns=tuple(x_columns), time_cuts=tuple(time_cuts), gamma=_as_tuple(gamma))

    @classmethod
    def logistic_txq(cls, x_columns: Sequence[int] = (0,), time_cuts: Sequence[float] = (),
                     aux_levels: int = 2, intercept: bool = True, gamma=None) -> "MissingnessModel":
        return cls(kind=MissingnessKind.LOGISTIC_TXQ, intercept=intercept, q_terms=True, aux_levels=aux_levels,
                   x_columns=tuple(x_columns), time_cuts=tuple(time_cuts), gamma=_as_tuple(gamma))

    @classmethod
    def logistic_txy(cls, n_subtypes: int = 2, x_columns: Sequence[int] = (), time_cuts: Sequence[float] = (),
                     intercept: bool = False, gamma=None) -> "MissingnessModel":
        return cls(kind=MissingnessKind.LOGISTIC_TXY, intercept=intercept, y_terms=True, n_subtypes=n_subtypes,
                   x_columns=tuple(x_columns), time_cuts=tuple(time_cuts), gamma=_as_tuple(gamma))

    @classmethod
    def constant(cls, kind: MissingnessKind = MissingnessKind.LOGISTIC_TXQ) -> "MissingnessModel":
        """No terms at all: pi = 1/2 for everyone, which cancels from every ratio"""
        if kind == MissingnessKind.LOGISTIC_TXY:
            return cls(kind=kind, intercept=False, y_terms=False)
        return cls(kind=MissingnessKind.LOGISTIC_TXQ, intercept=False)

    # Structure

    @property
    def uses_q(self) -> bool:
        return self.q_terms

    @property
    def uses_y(self) -> bool:
        return self.y_terms

    @property
    def depends_on_time_x_only(self) -> bool:
        return not (self.q_terms or self.y_terms)

    @property
    def n_time_bins(self) -> int:
        return len(self.time_cuts) + 1

    @property
    def n_gamma(self) -> int:
        return (int(self.intercept)
                + (self.aux_levels - 1 if self.q_terms else 0)
                + (self.n_subtypes - 1 if self.y_terms else 0)
                + len(self.x_columns)
                + len(self.time_cuts))

    def gamma_values(self) -> np.ndarray:
        if self.gamma is None:
            return np.zeros(self.n_gamma)
        return np.asarray(self.gamma, dtype=float)

    def with_gamma(self, gamma) -> "MissingnessModel":
        return self.model_copy(update={'gamma': _as_tuple(gamma)})

    def term_names(self, covariate_names: Optional[Sequence[str]] = None) -> List[str]:
        names = []
        if self.intercept:
            names.append("(Intercept)")
        if self.q_terms:
            names.extend(f"q={q}" for q in range(1, self.aux_levels))
        if self.y_terms:
            names.extend(f"y={k}" for k in range(2, self.n_subtypes + 1))
        for c in self.x_columns:
            label = covariate_names[c] if covariate_names is not None and c < len(covariate_names) else f"x{c}"
            names.append(f"x:{label}")
        names.extend(f"t>{c:g}" for c in self.time_cuts)
        return names

    # Design matrices

    def time_bin(self, t) -> np.ndarray:
        """Number of cut points strictly below t (bin index for I{t > c} terms)"""
        return np.searchsorted(np.asarray(self.time_cuts, dtype=float), t, side='left')

    def design_at_bins(self, x, bins, q=None, y=None) -> np.ndarray:
        """Design matrix with the time terms fixed by a bin index per row"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[0]
        bins = np.broadcast_to(np.asarray(bins, dtype=int), (n,))
        columns = []
        if self.intercept:
            columns.append(np.ones((n, 1)))
        if self.q_terms:
            if q is None:
                raise DomainError("missingness model needs the auxiliary covariate")
            q = np.broadcast_to(np.asarray(q, dtype=int), (n,))
            columns.append((q[:, None] == np.arange(1, self.aux_levels)[None, :]).astype(float))
        if self.y_terms:
            if y is None:
                raise DomainError("missingness model needs the subtype")
            y = np.broadcast_to(np.asarray(y, dtype=int), (n,))
            columns.append((y[:, None] == np.arange(2, self.n_subtypes + 1)[None, :]).astype(float))
        if self.x_columns:
            if max(self.x_columns) >= x.shape[1]:
                raise DomainError("missingness model references a covariate column that does not exist",
                                  f"columns {self.x_columns}, p = {x.shape[1]}")
            columns.append(x[:, list(self.x_columns)])
        if self.time_cuts:
            columns.append((bins[:, None] > np.arange(len(self.time_cuts))[None, :]).astype(float))
        if not columns:
            return np.zeros((n, 0))
        return np.hstack(columns)

    def design(self, t, x, q=None, y=None) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.design_at_bins(x, self.time_bin(t), q=q, y=y)


def logistic_terms(design: np.ndarray, gamma: np.ndarray):
    """log pi, log(1 - pi) and pi at each design row.

    Gradients in gamma are (1 - pi) z and -pi z; both Hessians are
    -pi (1 - pi) z z'.
    """
    eta = design @ np.asarray(gamma, dtype=float)
    return log_expit(eta), log1m_expit(eta), expit(eta)


def pi_eval(model: MissingnessModel, t: float, x, q: Optional[int] = None, k: Optional[int] = None) -> float:
    """P(O = 1 | t, x, q, y = k) under the model's own gamma; irrelevant inputs are ignored"""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if not math.isfinite(t) or not np.all(np.isfinite(x_arr)):
        raise DomainError("pi_eval requires finite inputs")
    z = model.design([t], x_arr[None, :], q=q if model.uses_q else None, y=k if model.uses_y else None)
    return float(expit(z @ model.gamma_values())[0])


def _as_tuple(values) -> Optional[Tuple[float, ...]]:
    if values is None:
        return None
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())
