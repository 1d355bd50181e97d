"""
Tests for the statistical model objects: records, alpha, nu, pi and parameter layouts
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import DataError, DomainError
from model import (
    BaselineRatioSpec, MissingnessKind, MissingnessModel, NuModel, ParameterLayout, ParameterVector,
    SubjectRecord, alpha_eval, expit, log_sum_exp, logit, nu_eval, pi_eval, record_violations, relative_hazard,
)


class TestNumerics:
    def test_expit_is_symmetric(self):
        z = np.linspace(-40, 40, 81)
        assert np.allclose(expit(-z), 1.0 - expit(z), atol=1e-15)

    def test_logit_inverts_expit(self):
        p = np.array([0.01, 0.2, 0.5, 0.8, 0.99])
        assert np.allclose(expit(logit(p)), p)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_logit_outside_unit_interval(self, p):
        with pytest.raises(DomainError):
            logit(p)

    def test_log_sum_exp_does_not_overflow(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0))
        with pytest.raises(DomainError):
            log_sum_exp([])


class TestSubjectRecord:
    def test_valid_records(self):
        SubjectRecord(time=1.0, event=True, covariates=(1.0,), subtype_observed=True, subtype=2, aux=1)
        censored = SubjectRecord(time=3.0, event=False, covariates=(0.0,))
        assert not censored.missing_subtype
        assert SubjectRecord(time=2.0, event=True, covariates=(0.0,), aux=0).missing_subtype

    @pytest.mark.parametrize("fields", [
        dict(time=-1.0, event=False),
        dict(time=float('nan'), event=False),
        dict(time=1.0, event=False, subtype_observed=True, subtype=1),
        dict(time=1.0, event=True, subtype_observed=True),
        dict(time=1.0, event=True, subtype_observed=False, subtype=1),
        dict(time=1.0, event=False, aux=1),
    ])
    def test_invariant_violations_raise(self, fields):
        with pytest.raises(DataError):
            SubjectRecord(covariates=(0.0,), **fields)

    def test_subtype_range_checked_against_k(self):
        problems = record_violations(1.0, True, True, 3, 0, n_subtypes=2)
        assert any("outside 1..2" in p for p in problems)


class TestBaselineRatio:
    def test_first_subtype_is_reference(self):
        spec = BaselineRatioSpec.power_law()
        assert alpha_eval(spec, 1, 2.5, [0.3, 1.2]) == 1.0

    def test_power_law_value(self):
        spec = BaselineRatioSpec.power_law()
        assert alpha_eval(spec, 2, 4.0, [0.5, 0.5]) == pytest.approx(1.0)
        assert alpha_eval(spec, 2, 10.0, [0.037, 1.0]) == pytest.approx(0.37)

    def test_piecewise_intervals_are_left_closed(self):
        spec = BaselineRatioSpec.piecewise([20, 40])
        eta = [0.0, math.log(2.0), math.log(3.0)]
        assert alpha_eval(spec, 2, 19.9, eta) == pytest.approx(1.0)
        assert alpha_eval(spec, 2, 20.0, eta) == pytest.approx(2.0)
        assert alpha_eval(spec, 2, 55.0, eta) == pytest.approx(3.0)

    def test_stratified_parameters(self):
        spec = BaselineRatioSpec.power_law(num_strata=2)
        eta = [1.0, 0.0, 2.0, 0.0]
        assert alpha_eval(spec, 2, 3.0, eta, stratum=0) == pytest.approx(1.0)
        assert alpha_eval(spec, 2, 3.0, eta, stratum=1) == pytest.approx(2.0)
        with pytest.raises(DomainError):
            alpha_eval(spec, 2, 3.0, eta, stratum=2)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_time(self, t):
        with pytest.raises(DomainError):
            alpha_eval(BaselineRatioSpec.power_law(), 2, t, [1.0, 1.0])

    def test_invalid_cuts(self):
        with pytest.raises(ValidationError):
            BaselineRatioSpec.piecewise([40, 20])
        with pytest.raises(ValidationError):
            BaselineRatioSpec(cuts=(10.0,))

    def test_relative_hazard(self):
        spec = BaselineRatioSpec.power_law()
        value = relative_hazard(spec, 2, 2.0, [1.0, 0.5], [0.2, -0.4], [0.5, 1.0])
        assert value == pytest.approx(1.0 * math.exp(0.0))

    @pytest.mark.parametrize("spec", [BaselineRatioSpec.power_law(n_subtypes=3),
                                      BaselineRatioSpec.piecewise([2.0, 5.0], n_subtypes=3)])
    def test_log_alpha_gradient_matches_finite_differences(self, spec):
        rng = np.random.default_rng(3)
        t = np.array([0.7, 2.0, 4.4, 9.0])
        eta = rng.uniform(0.3, 1.5, spec.n_eta)
        _, grad, hess = spec.log_alpha(eta, t)
        h = 1e-6
        for j in range(spec.n_eta):
            up, down = eta.copy(), eta.copy()
            up[j] += h
            down[j] -= h
            v_up, g_up, _ = spec.log_alpha(up, t)
            v_down, g_down, _ = spec.log_alpha(down, t)
            assert np.allclose(grad[..., j], (v_up - v_down) / (2 * h), rtol=1e-6, atol=1e-8)
            assert np.allclose(hess[..., j], (g_up - g_down) / (2 * h), rtol=1e-4, atol=1e-6)


class TestNuModel:
    def test_probabilities_round_trip(self):
        probs = np.array([[0.75, 0.25], [0.5, 0.5]])
        nu = NuModel.from_probabilities(probs)
        for k in (1, 2):
            for q in (0, 1):
                assert nu_eval(nu, k, q) == pytest.approx(probs[k - 1, q])

    def test_rows_sum_to_one(self):
        nu = NuModel(n_subtypes=3, aux_levels=4)
        table = np.exp(nu.log_table(np.random.default_rng(0).normal(size=nu.n_psi)))
        assert np.allclose(table.sum(axis=1), 1.0)

    def test_out_of_range_level(self):
        with pytest.raises(DomainError):
            nu_eval(NuModel(), 1, 2)
        with pytest.raises(DomainError):
            nu_eval(NuModel(), 3, 0)

    def test_derivatives_match_finite_differences(self):
        nu = NuModel(n_subtypes=2, aux_levels=3)
        psi = np.array([0.2, -0.4, 0.9, 0.1])
        _, grad, hess = nu.log_table_derivatives(psi)
        h = 1e-6
        for j in range(nu.n_psi):
            up, down = psi.copy(), psi.copy()
            up[j] += h
            down[j] -= h
            assert np.allclose(grad[..., j], (nu.log_table(up) - nu.log_table(down)) / (2 * h), atol=1e-8)
            g_up = nu.log_table_derivatives(up)[1]
            g_down = nu.log_table_derivatives(down)[1]
            assert np.allclose(hess[..., j], (g_up - g_down) / (2 * h), atol=1e-6)


class TestMissingnessModel:
    def test_logistic_q(self):
        model = MissingnessModel.logistic_q(gamma=(logit(0.2), logit(0.8) - logit(0.2)))
        assert pi_eval(model, 1.0, [0.0], q=0) == pytest.approx(0.2)
        assert pi_eval(model, 1.0, [0.0], q=1) == pytest.approx(0.8)

    def test_time_terms_use_strict_inequality(self):
        model = MissingnessModel.logistic_tx(x_columns=(), time_cuts=(50.0,), intercept=False, gamma=(2.0,))
        assert pi_eval(model, 50.0, [0.0]) == pytest.approx(0.5)
        assert pi_eval(model, 50.1, [0.0]) == pytest.approx(expit(2.0))

    def test_subtype_dependent_model(self):
        model = MissingnessModel.logistic_txy(x_columns=(0,), gamma=(math.log(5.0), 0.5))
        assert pi_eval(model, 1.0, [0.0], k=1) == pytest.approx(0.5)
        assert pi_eval(model, 1.0, [0.0], k=2) == pytest.approx(5.0 / 6.0)

    def test_constant_model_is_one_half(self):
        assert pi_eval(MissingnessModel.constant(), 3.0, [1.0], q=1) == pytest.approx(0.5)
        assert MissingnessModel.constant().n_gamma == 0

    def test_kind_restrictions(self):
        with pytest.raises(ValidationError):
            MissingnessModel(kind=MissingnessKind.LOGISTIC_Q, q_terms=True, x_columns=(0,))
        with pytest.raises(ValidationError):
            MissingnessModel(kind=MissingnessKind.LOGISTIC_TXQ, y_terms=True)
        with pytest.raises(ValidationError):
            MissingnessModel(kind=MissingnessKind.LOGISTIC_TXY, q_terms=True)
        with pytest.raises(ValidationError):
            MissingnessModel.logistic_q(gamma=(1.0, 2.0, 3.0))

    def test_term_names(self):
        model = MissingnessModel.logistic_txy(n_subtypes=3, x_columns=(1,), time_cuts=(50.0,), intercept=True)
        assert model.term_names(("age", "bmi")) == ["(Intercept)", "y=2", "y=3", "x:bmi", "t>50"]
        assert model.n_gamma == 5

    def test_non_finite_inputs(self):
        with pytest.raises(DomainError):
            pi_eval(MissingnessModel.logistic_tx(), float('inf'), [0.0])


class TestParameters:
    def test_pack_and_reorder(self):
        layout = ParameterLayout((("beta[1]", 2), ("eta", 2), ("gamma", 1)))
        theta = ParameterVector.pack(layout, {"beta[1]": [1, 2], "eta": [3, 4], "gamma": [5]})
        permuted = theta.reordered(layout.permuted(["gamma", "beta[1]", "eta"]))
        assert list(permuted.values) == [5, 1, 2, 3, 4]
        assert np.array_equal(permuted.block("eta"), theta.block("eta"))
        assert permuted.reordered(layout).as_dict() == theta.as_dict()

    def test_size_mismatch(self):
        layout = ParameterLayout((("beta[1]", 2),))
        with pytest.raises(DomainError):
            ParameterVector(np.zeros(3), layout)
        with pytest.raises(DomainError):
            ParameterVector.pack(layout, {"beta[1]": [1.0]})

    def test_values_are_read_only(self):
        theta = ParameterVector(np.zeros(2), ParameterLayout((("beta[1]", 2),)))
        with pytest.raises(ValueError):
            theta.values[0] = 1.0
