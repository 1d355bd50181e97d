"""
Missingness Mechanisms
The data-generating observation probabilities of each scenario and the
missingness models the estimators fit to the simulated data
"""

from typing import Optional, Tuple

import numpy as np

from core.errors import ConfigurationError
from inference.types import ModelSpecification
from model.missingness import MissingnessKind, MissingnessModel, logistic_terms, pi_eval
from model.numerics import logit
from model.records import SubjectRecord
from .scenario import MechanismKind, Scenario


def solve_marq_coefficients(p_obs_q0: float, p_obs_q1: float) -> Tuple[float, float]:
    """(gamma_0, gamma_q) with expit(gamma_0) = p_obs_q0 and expit(gamma_0 + gamma_q) = p_obs_q1"""
    for name, value in (('p_obs_q0', p_obs_q0), ('p_obs_q1', p_obs_q1)):
        if not 0.0 < value < 1.0:
            raise ConfigurationError(f"{name} must lie strictly between 0 and 1", f"got {value}", field=name)
    gamma_0 = float(logit(p_obs_q0))
    return gamma_0, float(logit(p_obs_q1)) - gamma_0


def true_missingness_model(mechanism) -> Optional[MissingnessModel]:
    """The generating pi with its gamma set; None when every subtype is observed"""
    kind = MechanismKind(mechanism.kind)
    if kind == MechanismKind.ALWAYS:
        return None
    if kind == MechanismKind.MARQ:
        return MissingnessModel.logistic_q(aux_levels=2, intercept=True,
                                           gamma=solve_marq_coefficients(mechanism.p_obs_q0, mechanism.p_obs_q1))
    if kind == MechanismKind.MARTXQ:
        return MissingnessModel.logistic_txq(x_columns=(0,), time_cuts=(mechanism.time_cut,), aux_levels=2,
                                             intercept=False,
                                             gamma=(mechanism.gamma_q, mechanism.gamma_x, mechanism.gamma_t))
    return MissingnessModel.logistic_txy(n_subtypes=2, x_columns=(0,), time_cuts=(mechanism.time_cut,),
                                         intercept=False,
                                         gamma=(mechanism.gamma_y, mechanism.gamma_x, mechanism.gamma_t))


def observation_probabilities(mechanism, time: np.ndarray, x: np.ndarray, aux: np.ndarray,
                              subtype: np.ndarray) -> np.ndarray:
    """P(O = 1) for event rows with subtype and aux already drawn"""
    model = true_missingness_model(mechanism)
    if model is None:
        return np.ones(len(time))
    design = model.design(time, x, q=aux if model.uses_q else None, y=subtype if model.uses_y else None)
    _, _, pi = logistic_terms(design, model.gamma_values())
    return pi


def assign_missingness(record: SubjectRecord, mechanism, rng: np.random.Generator) -> bool:
    """Bernoulli(pi) observation flag for one event record"""
    if not record.event:
        return False
    model = true_missingness_model(mechanism)
    if model is None:
        return True
    pi = pi_eval(model, record.time, record.covariates, q=record.aux, k=record.subtype)
    return bool(rng.random() < pi)


def fitted_models(scenario: Scenario) -> ModelSpecification:
    """
    Missingness models used when fitting simulated data

    MAR_Q rows: LY fits expit(g0 + gy I{y=2}).
    (t, x, q) and NMAR rows: LY fits expit(gy I{y=2} + gx x + gt I{t>cut}) without intercept.
    GR always fits expit(g0 + gx x + gt I{t>cut}).
    With every subtype observed both are constant.
    """
    kind = scenario.mechanism_kind
    alpha = scenario.alpha.to_spec(scenario.n_subtypes)
    if kind == MechanismKind.ALWAYS:
        return ModelSpecification(
            alpha=alpha,
            ly_missingness=MissingnessModel.constant(MissingnessKind.LOGISTIC_TXY),
            gr_missingness=MissingnessModel.constant(),
            cca_drop_rows=scenario.cca_drop_rows,
        )
    cut = (50.0,) if kind == MechanismKind.MARQ else (scenario.mechanism.time_cut,)
    if kind == MechanismKind.MARQ:
        ly = MissingnessModel.logistic_txy(n_subtypes=2, intercept=True)
    else:
        ly = MissingnessModel.logistic_txy(n_subtypes=2, x_columns=(0,), time_cuts=cut, intercept=False)
    gr = MissingnessModel.logistic_tx(x_columns=(0,), time_cuts=cut, intercept=True)
    return ModelSpecification(alpha=alpha, ly_missingness=ly, gr_missingness=gr,
                              cca_drop_rows=scenario.cca_drop_rows)
