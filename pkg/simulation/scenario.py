"""
Simulation Scenarios
Validated description of one simulation design: the two-subtype data
generating process, the missingness mechanism and the estimators to run
"""

import math
from enum import Enum
from typing import Annotated, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from inference.config import DEFAULT_ESTIMATORS, ESTIMATOR_CONFIGS
from model.baseline import AlphaForm, BaselineRatioSpec

# Baseline level giving about 70% censoring under the default design
DEFAULT_BASELINE_LEVEL = 0.00363


def _probability(name: str, value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")
    return value


def _split_list(value):
    """Comma-separated text (from key-value files and flags) as a list"""
    if isinstance(value, str):
        return [part.strip() for part in value.split(',') if part.strip()]
    return value


def _exp_gamma(data, exp_key: str, key: str):
    """Accept a table-style e^gamma value in place of gamma"""
    if isinstance(data, dict) and exp_key in data:
        data = dict(data)
        value = float(data.pop(exp_key))
        if value <= 0:
            raise ValueError(f"{exp_key} must be positive, got {value}")
        if key in data:
            raise ValueError(f"give either {key} or {exp_key}, not both")
        data[key] = math.log(value)
    return data


class MechanismKind(str, Enum):
    MARQ = "marq"
    MARTXQ = "martxq"
    NMAR = "nmar"
    ALWAYS = "always"


class MarqMechanism(BaseModel):
    """pi(q) = expit(gamma_0 + gamma_q q), given as the two target observation probabilities"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal["marq"] = "marq"
    p_obs_q0: float = 0.2
    p_obs_q1: float = 0.8

    @field_validator('p_obs_q0', 'p_obs_q1')
    @classmethod
    def validate_probability(cls, v, info):
        return _probability(info.field_name, v)


class MartxqMechanism(BaseModel):
    """pi = expit(gamma_q q + gamma_x x + gamma_t I{t > time_cut})"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal["martxq"] = "martxq"
    gamma_q: float = math.log(5.0)
    gamma_x: float = 0.5
    gamma_t: float = -0.01
    time_cut: float = Field(default=50.0, gt=0)

    @model_validator(mode='before')
    @classmethod
    def accept_exp_gamma(cls, data):
        return _exp_gamma(data, 'exp_gamma_q', 'gamma_q')


class NmarMechanism(BaseModel):
    """pi = expit(gamma_y I{y = 2} + gamma_x x + gamma_t I{t > time_cut})"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal["nmar"] = "nmar"
    gamma_y: float = math.log(5.0)
    gamma_x: float = 0.5
    gamma_t: float = -0.01
    time_cut: float = Field(default=50.0, gt=0)

    @model_validator(mode='before')
    @classmethod
    def accept_exp_gamma(cls, data):
        return _exp_gamma(data, 'exp_gamma_y', 'gamma_y')


class AlwaysObserved(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal["always"] = "always"


Mechanism = Annotated[
    Union[MarqMechanism, MartxqMechanism, NmarMechanism, AlwaysObserved],
    Field(discriminator='kind'),
]


class CensoringSpec(BaseModel):
    """C = min(Exponential(mean), admin_time); disabled means no censoring at all"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    enabled: bool = True
    exponential_mean: float = Field(default=50.0, gt=0)
    admin_time: float = Field(default=90.0, gt=0)


class AlphaFitSpec(BaseModel):
    """Form of alpha_2 fitted by the estimators (the data are always generated with a power law)"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    form: AlphaForm = AlphaForm.POWER_LAW
    cuts: Tuple[float, ...] = ()

    @field_validator('cuts', mode='before')
    @classmethod
    def split_cuts(cls, v):
        return _split_list(v)

    def to_spec(self, n_subtypes: int = 2) -> BaselineRatioSpec:
        return BaselineRatioSpec(form=self.form, n_subtypes=n_subtypes, cuts=self.cuts)


class Scenario(BaseModel):
    """One simulation design with two subtypes and a single binary covariate"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = "scenario"
    n: int = Field(default=10000, ge=2)
    true_beta: Tuple[float, float] = (0.223, 0.916)
    true_eta: Tuple[float, float] = (0.037, 1.0)
    covariate_prevalence: float = 0.4
    baseline_level: float = Field(default=DEFAULT_BASELINE_LEVEL, gt=0)
    censoring: CensoringSpec = CensoringSpec()
    q_dist: Tuple[float, float] = (0.25, 0.5)
    mechanism: Mechanism = MarqMechanism()
    replications: int = Field(default=200, ge=1)
    seed: int = Field(default=20240101, ge=0)
    estimators: Tuple[str, ...] = DEFAULT_ESTIMATORS
    alpha: AlphaFitSpec = AlphaFitSpec()
    cca_drop_rows: bool = True

    @field_validator('true_beta', 'true_eta', 'q_dist', 'estimators', mode='before')
    @classmethod
    def split_lists(cls, v):
        return _split_list(v)

    @field_validator('covariate_prevalence')
    @classmethod
    def validate_prevalence(cls, v):
        return _probability('covariate_prevalence', v)

    @field_validator('q_dist')
    @classmethod
    def validate_q_dist(cls, v):
        return tuple(_probability('q_dist', p) for p in v)

    @field_validator('true_eta')
    @classmethod
    def validate_eta(cls, v):
        if v[0] <= 0:
            raise ValueError("the alpha scale true_eta[0] must be positive")
        if v[1] <= -1:
            raise ValueError("the alpha exponent true_eta[1] must exceed -1")
        return v

    @field_validator('estimators')
    @classmethod
    def validate_estimators(cls, v):
        names = tuple(name.strip().lower() for name in v)
        if not names:
            raise ValueError("at least one estimator is required")
        unknown = [name for name in names if name not in ESTIMATOR_CONFIGS]
        if unknown:
            raise ValueError(f"unknown estimators: {', '.join(unknown)}")
        if len(set(names)) != len(names):
            raise ValueError("estimators must not repeat")
        return names

    @property
    def n_subtypes(self) -> int:
        return 2

    @property
    def mechanism_kind(self) -> MechanismKind:
        return MechanismKind(self.mechanism.kind)

    def with_overrides(self, replications: Optional[int] = None, seed: Optional[int] = None,
                       estimators: Optional[Tuple[str, ...]] = None, n: Optional[int] = None) -> "Scenario":
        """Copy with command-line overrides applied and re-validated"""
        data = self.model_dump()
        if replications is not None:
            data['replications'] = replications
        if seed is not None:
            data['seed'] = seed
        if estimators is not None:
            data['estimators'] = tuple(estimators)
        if n is not None:
            data['n'] = n
        return Scenario.model_validate(data)
