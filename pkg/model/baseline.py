"""
Baseline Hazard Ratio Functions
alpha_k(t; eta) = lambda_0k(t) / lambda_01(t), with alpha_1 fixed at 1
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import DomainError


class AlphaForm(str, Enum):
    POWER_LAW = "power"
    PIECEWISE_CONSTANT = "piecewise"


class BaselineRatioSpec(BaseModel):
    """Functional form of the baseline hazard ratios for subtypes 2..K.

    Power law: alpha_k(t) = eta_k1 * t ** eta_k2 (natural scale).
    Piecewise constant: one log-level per interval [c_j, c_{j+1}), the first
    interval starting at 0 and the last one open-ended.
    With num_strata > 1 every stratum gets its own copy of the parameters.

    eta layout: stratum-major, then subtype 2..K, then the per-subtype
    parameters (2 for the power law, one per interval otherwise).
    """
    model_config = ConfigDict(frozen=True)

    form: AlphaForm = AlphaForm.POWER_LAW
    n_subtypes: int = Field(default=2, ge=1)
    cuts: Tuple[float, ...] = ()
    num_strata: int = Field(default=1, ge=1)
    stratum_codes: Tuple[int, ...] = Field(default=(), description="Label of each stratum index; empty means 0..S-1")

    @field_validator('cuts')
    @classmethod
    def validate_cuts(cls, v):
        values = tuple(float(c) for c in v)
        for c in values:
            if not math.isfinite(c) or c <= 0:
                raise ValueError(f"cut points must be finite and positive (got {c})")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("cut points must be strictly increasing")
        return values

    @model_validator(mode='after')
    def validate_form(self):
        if self.form == AlphaForm.POWER_LAW and self.cuts:
            raise ValueError("cut points only apply to the piecewise-constant form")
        if self.stratum_codes and len(self.stratum_codes) != self.num_strata:
            raise ValueError(f"{len(self.stratum_codes)} stratum codes for {self.num_strata} strata")
        return self

    @classmethod
    def power_law(cls, n_subtypes: int = 2, num_strata: int = 1, stratum_codes=()) -> "BaselineRatioSpec":
        return cls(form=AlphaForm.POWER_LAW, n_subtypes=n_subtypes, num_strata=num_strata,
                   stratum_codes=tuple(stratum_codes))

    @classmethod
    def piecewise(cls, cuts, n_subtypes: int = 2, num_strata: int = 1, stratum_codes=()) -> "BaselineRatioSpec":
        return cls(form=AlphaForm.PIECEWISE_CONSTANT, n_subtypes=n_subtypes, cuts=tuple(cuts), num_strata=num_strata,
                   stratum_codes=tuple(stratum_codes))

    @property
    def params_per_subtype(self) -> int:
        if self.form == AlphaForm.POWER_LAW:
            return 2
        return len(self.cuts) + 1

    @property
    def n_eta(self) -> int:
        return (self.n_subtypes - 1) * self.num_strata * self.params_per_subtype

    def eta_index(self, k, stratum, j):
        """Position of parameter j of subtype k (>= 2) in stratum; broadcasts over arrays"""
        return ((stratum * (self.n_subtypes - 1)) + (k - 2)) * self.params_per_subtype + j

    def eta_labels(self) -> List[str]:
        labels = []
        for s in range(self.num_strata):
            for k in range(2, self.n_subtypes + 1):
                prefix = f"alpha[{k}]" if self.num_strata == 1 else f"alpha[{k}|s={self.stratum_label(s)}]"
                if self.form == AlphaForm.POWER_LAW:
                    labels.extend([f"{prefix}:scale", f"{prefix}:exponent"])
                else:
                    bounds = (0.0,) + self.cuts
                    labels.extend([f"{prefix}:log_level[t>={b:g}]" for b in bounds])
        return labels

    def stratum_label(self, s: int) -> int:
        return self.stratum_codes[s] if self.stratum_codes else s

    def interval_of(self, t):
        """Interval index of t; intervals are left-closed, right-open"""
        return np.searchsorted(np.asarray(self.cuts, dtype=float), t, side='right')

    def initial_eta(self, ratios: Optional[np.ndarray] = None) -> np.ndarray:
        """Neutral starting values.

        Args:
            ratios: (num_strata, K) crude observed-event ratios n_k / n_1 per
                stratum; used as the power-law scale (exponent starts at 0)

        Returns:
            eta vector of length n_eta
        """
        eta = np.zeros(self.n_eta)
        if self.form != AlphaForm.POWER_LAW:
            return eta
        for s in range(self.num_strata):
            for k in range(2, self.n_subtypes + 1):
                ratio = 1.0
                if ratios is not None:
                    ratio = float(ratios[s, k - 1])
                    if not math.isfinite(ratio) or ratio <= 0:
                        ratio = 1.0
                eta[self.eta_index(k, s, 0)] = ratio
        return eta

    def _check(self, eta: np.ndarray, t: np.ndarray, strata: np.ndarray) -> None:
        if eta.shape != (self.n_eta,):
            raise DomainError(f"eta must have length {self.n_eta}", f"got shape {eta.shape}")
        if t.size and np.any(~(t > 0)):
            raise DomainError("alpha requires t > 0", f"min t = {np.nanmin(t) if t.size else 'n/a'}")
        if strata.size and (strata.min() < 0 or strata.max() >= self.num_strata):
            raise DomainError(f"stratum outside 0..{self.num_strata - 1}")

    def log_alpha(self, eta, t, strata=None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized log alpha_k(t) for every k, with derivatives in eta.

        Returns:
            (values (n, K), gradient (n, K, n_eta), hessian (n, K, n_eta, n_eta));
            column k = 1 is identically zero
        """
        eta = np.asarray(eta, dtype=float)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = t.shape[0]
        strata = np.zeros(n, dtype=int) if strata is None else np.atleast_1d(np.asarray(strata, dtype=int))
        self._check(eta, t, strata)

        K = self.n_subtypes
        values = np.zeros((n, K))
        grad = np.zeros((n, K, self.n_eta))
        hess = np.zeros((n, K, self.n_eta, self.n_eta))
        rows = np.arange(n)

        if self.form == AlphaForm.POWER_LAW:
            log_t = np.log(t)
            for k in range(2, K + 1):
                i_scale = self.eta_index(k, strata, 0)
                i_exp = self.eta_index(k, strata, 1)
                scale = eta[i_scale]
                with np.errstate(divide='ignore', invalid='ignore'):
                    values[:, k - 1] = np.log(scale) + eta[i_exp] * log_t
                    grad[rows, k - 1, i_scale] = 1.0 / scale
                    hess[rows, k - 1, i_scale, i_scale] = -1.0 / scale ** 2
                grad[rows, k - 1, i_exp] = log_t
        else:
            interval = self.interval_of(t)
            for k in range(2, K + 1):
                idx = self.eta_index(k, strata, interval)
                values[:, k - 1] = eta[idx]
                grad[rows, k - 1, idx] = 1.0

        return values, grad, hess


def _check_subtype(spec: BaselineRatioSpec, k: int) -> None:
    if not 1 <= k <= spec.n_subtypes:
        raise DomainError(f"subtype {k} outside 1..{spec.n_subtypes}")


def alpha_eval(spec: BaselineRatioSpec, k: int, t: float, eta, stratum: int = 0) -> float:
    """alpha_k(t; eta) in the given stratum; exactly 1 for k = 1"""
    _check_subtype(spec, k)
    if not t > 0:
        raise DomainError("alpha requires t > 0", f"t = {t}")
    if not 0 <= stratum < spec.num_strata:
        raise DomainError(f"unknown stratum {stratum}", f"num_strata = {spec.num_strata}")
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (spec.n_eta,):
        raise DomainError(f"eta must have length {spec.n_eta}", f"got shape {eta.shape}")
    if k == 1:
        return 1.0
    if spec.form == AlphaForm.POWER_LAW:
        scale = eta[spec.eta_index(k, stratum, 0)]
        exponent = eta[spec.eta_index(k, stratum, 1)]
        return float(scale * t ** exponent)
    interval = int(spec.interval_of(t))
    return float(np.exp(eta[spec.eta_index(k, stratum, interval)]))


def relative_hazard(spec: BaselineRatioSpec, k: int, t: float, x, beta_k, eta, stratum: int = 0) -> float:
    """alpha_k(t; eta) * exp(beta_k' x), the lambda_01-free factor of the subtype-k hazard"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    beta_k = np.atleast_1d(np.asarray(beta_k, dtype=float))
    if x.shape != beta_k.shape:
        raise DomainError("covariates and coefficients differ in length", f"{x.shape} vs {beta_k.shape}")
    return alpha_eval(spec, k, t, eta, stratum) * float(np.exp(x @ beta_k))
