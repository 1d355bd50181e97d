"""
Likelihood tests against term-by-term oracles that loop over events and risk sets
"""

import math

import numpy as np
import pytest

from conftest import make_dataset, random_tiny_dataset, SMALL_ROWS
from core.errors import ConfigurationError, DataError, FitError
from likelihoods import (
    gr_system, loglik_cca, loglik_gr_L, loglik_Lstar, loglik_LstarQ, loglik_LstarQ1, loglik_LstarQ2,
    loglik_LstarY,
)
from likelihoods.dataset import NO_AUX
from model.baseline import AlphaForm, BaselineRatioSpec, alpha_eval
from model.missingness import MissingnessKind, MissingnessModel, pi_eval
from model.nu import NuModel, nu_eval
from model.parameters import ParameterLayout, ParameterVector

SPEC = BaselineRatioSpec.power_law()
NU = NuModel()
MISS_Q = MissingnessModel.logistic_txq(x_columns=(0,), time_cuts=(4.0,))
MISS_Y = MissingnessModel.logistic_txy(x_columns=(1,), time_cuts=(5.0,), intercept=True)
MISS_TX = MissingnessModel.logistic_tx(x_columns=(0, 1), time_cuts=(4.0,))


def layout_for(spec=SPEC, p=2, nu=None, miss=None, blocks=("beta", "eta")):
    parts = []
    for name in blocks:
        if name == "beta":
            parts.extend((f"beta[{k}]", p) for k in range(1, spec.n_subtypes + 1))
        elif name == "eta":
            parts.append(("eta", spec.n_eta))
    if nu is not None:
        parts.append(("psi", nu.n_psi))
    if miss is not None:
        parts.append(("gamma", miss.n_gamma))
    return ParameterLayout(tuple(parts))


def random_theta(layout, rng, spec=SPEC):
    values = rng.normal(scale=0.5, size=layout.size)
    if layout.has("eta") and spec.form == AlphaForm.POWER_LAW:
        # Power-law scales must stay positive
        scales = layout.indices("eta")[0::2]
        values[scales] = rng.uniform(0.3, 2.0, scales.size)
    return ParameterVector(values, layout)


# Oracles

def _beta(theta, k):
    return np.asarray(theta.block(f"beta[{k}]"))


def _alpha(spec, theta, k, t, stratum):
    eta = theta.block("eta") if theta.layout.has("eta") else np.zeros(0)
    return alpha_eval(spec, k, t, eta, stratum)


def _at_risk(data, i):
    return [j for j in range(data.n) if data.stratum[j] == data.stratum[i] and data.time[j] >= data.time[i]]


def _with_gamma(miss, theta):
    return miss.with_gamma(theta.block("gamma"))


def _with_psi(nu, theta):
    return nu.with_psi(theta.block("psi"))


def oracle_cca(data, spec, theta, drop_rows=False):
    if drop_rows:
        data = data.drop_missing_subtype_rows()
    terms = []
    for i in range(data.n):
        if not data.subtype_observed[i]:
            continue
        beta = _beta(theta, int(data.subtype[i]))
        terms.append(float(data.covariates[i] @ beta))
        terms.append(-math.log(math.fsum(math.exp(data.covariates[j] @ beta) for j in _at_risk(data, i))))
    return math.fsum(terms)


def oracle_joint(data, spec, theta, nu=None, miss=None):
    """L*, L*_Q2, L*_Q and L*_Y: pi and nu factors present only when given"""
    K = spec.n_subtypes
    nu = _with_psi(nu, theta) if nu is not None else None
    miss = _with_gamma(miss, theta) if miss is not None else None
    terms = []
    for i in range(data.n):
        if not data.event[i]:
            continue
        t, x, s = float(data.time[i]), data.covariates[i], int(data.stratum[i])
        q = int(data.aux[i]) if data.aux[i] != NO_AUX else None

        def candidate(k, observed):
            value = _alpha(spec, theta, k, t, s) * math.exp(x @ _beta(theta, k))
            if nu is not None:
                value *= nu_eval(nu, k, q)
            if miss is not None:
                pi = pi_eval(miss, t, x, q=q, k=k)
                value *= pi if observed else 1.0 - pi
            return value

        if data.subtype_observed[i]:
            numerator = candidate(int(data.subtype[i]), True)
        else:
            numerator = math.fsum(candidate(k, False) for k in range(1, K + 1))
        denominator = math.fsum(
            _alpha(spec, theta, m, t, s) * math.exp(data.covariates[j] @ _beta(theta, m))
            for j in _at_risk(data, i) for m in range(1, K + 1)
        )
        terms.append(math.log(numerator) - math.log(denominator))
    return math.fsum(terms)


def oracle_gr_L(data, spec, miss, theta):
    K = spec.n_subtypes
    miss = _with_gamma(miss, theta)
    terms = []
    for i in range(data.n):
        if not data.event[i]:
            continue
        t, s = float(data.time[i]), int(data.stratum[i])
        pi = [pi_eval(miss, t, data.covariates[j]) for j in range(data.n)]
        risk = _at_risk(data, i)
        if data.subtype_observed[i]:
            beta = _beta(theta, int(data.subtype[i]))
            numerator = pi[i] * math.exp(data.covariates[i] @ beta)
            denominator = math.fsum(pi[j] * math.exp(data.covariates[j] @ beta) for j in risk)
        else:
            def total(j):
                return math.fsum(_alpha(spec, theta, k, t, s) * math.exp(data.covariates[j] @ _beta(theta, k))
                                 for k in range(1, K + 1))
            numerator = (1.0 - pi[i]) * total(i)
            denominator = math.fsum((1.0 - pi[j]) * total(j) for j in risk)
        terms.append(math.log(numerator) - math.log(denominator))
    return math.fsum(terms)


def oracle_bernoulli(data, miss, gamma):
    miss = miss.with_gamma(gamma)
    terms = []
    for i in range(data.n):
        if not data.event[i]:
            continue
        q = int(data.aux[i]) if miss.uses_q else None
        pi = pi_eval(miss, float(data.time[i]), data.covariates[i], q=q)
        terms.append(math.log(pi) if data.subtype_observed[i] else math.log(1.0 - pi))
    return math.fsum(terms)


# Objectives under test

def objectives(data, rng):
    """(name, layout, objective, oracle, random theta) for every likelihood"""
    cases = []
    layout = layout_for(blocks=("beta",))
    cases.append(("cca", layout,
                  lambda theta: loglik_cca(data, SPEC, theta),
                  lambda theta: oracle_cca(data, SPEC, theta)))
    layout = layout_for()
    cases.append(("lstar", layout,
                  lambda theta: loglik_Lstar(data, SPEC, theta),
                  lambda theta: oracle_joint(data, SPEC, theta)))
    layout = layout_for(nu=NU)
    cases.append(("lq2", layout,
                  lambda theta: loglik_LstarQ2(data, SPEC, NU, theta),
                  lambda theta: oracle_joint(data, SPEC, theta, nu=NU)))
    layout = layout_for(nu=NU, miss=MISS_Q)
    cases.append(("lq", layout,
                  lambda theta: loglik_LstarQ(data, SPEC, NU, MISS_Q, theta),
                  lambda theta: oracle_joint(data, SPEC, theta, nu=NU, miss=MISS_Q)))
    layout = layout_for(miss=MISS_Y)
    cases.append(("ly", layout,
                  lambda theta: loglik_LstarY(data, SPEC, MISS_Y, theta),
                  lambda theta: oracle_joint(data, SPEC, theta, miss=MISS_Y)))
    layout = layout_for(miss=MISS_TX)
    cases.append(("gr_L", layout,
                  lambda theta: loglik_gr_L(data, SPEC, MISS_TX, theta),
                  lambda theta: oracle_gr_L(data, SPEC, MISS_TX, theta)))
    return [(name, layout, objective, oracle, random_theta(layout, rng))
            for name, layout, objective, oracle in cases]


NAMES = ["cca", "lstar", "lq2", "lq", "ly", "gr_L"]


def _case(name, data, rng):
    for case in objectives(data, rng):
        if case[0] == name:
            return case
    raise KeyError(name)


class TestOracleEquivalence:
    @pytest.mark.parametrize("name", NAMES)
    def test_small_dataset(self, name, small_data):
        _, _, objective, oracle, theta = _case(name, small_data, np.random.default_rng(1))
        assert objective(theta).value == pytest.approx(oracle(theta), abs=1e-11)

    @pytest.mark.parametrize("name", NAMES)
    def test_random_tiny_datasets(self, name):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            data = random_tiny_dataset(rng)
            _, _, objective, oracle, theta = _case(name, data, rng)
            assert objective(theta).value == pytest.approx(oracle(theta), abs=1e-11)

    def test_stratified_risk_sets(self, stratified_data):
        spec = BaselineRatioSpec.power_law(num_strata=2)
        layout = layout_for(spec=spec, nu=NU)
        theta = random_theta(layout, np.random.default_rng(9), spec)
        value = loglik_LstarQ2(stratified_data, spec, NU, theta).value
        assert value == pytest.approx(oracle_joint(stratified_data, spec, theta, nu=NU), abs=1e-11)

    def test_piecewise_alpha(self, small_data):
        spec = BaselineRatioSpec.piecewise([3.0, 6.0])
        layout = layout_for(spec=spec, miss=MISS_Y)
        theta = random_theta(layout, np.random.default_rng(4), spec)
        value = loglik_LstarY(small_data, spec, MISS_Y, theta).value
        assert value == pytest.approx(oracle_joint(small_data, spec, theta, miss=MISS_Y), abs=1e-11)

    def test_cca_drop_rows(self, small_data):
        layout = layout_for(blocks=("beta",))
        theta = random_theta(layout, np.random.default_rng(5))
        kept = loglik_cca(small_data, SPEC, theta).value
        dropped = loglik_cca(small_data, SPEC, theta, drop_rows=True).value
        assert dropped == pytest.approx(oracle_cca(small_data, SPEC, theta, drop_rows=True), abs=1e-11)
        assert kept != pytest.approx(dropped)

    def test_bernoulli_likelihood(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            data = random_tiny_dataset(rng)
            gamma = rng.normal(size=MISS_Q.n_gamma)
            value = loglik_LstarQ1(data, MISS_Q, gamma).value
            assert value == pytest.approx(oracle_bernoulli(data, MISS_Q, gamma), abs=1e-11)


class TestDerivatives:
    @pytest.mark.parametrize("name", NAMES)
    def test_gradient_and_hessian(self, name, small_data):
        rng = np.random.default_rng(20)
        for _ in range(20):
            _, layout, objective, _, theta = _case(name, small_data, rng)
            evaluation = objective(theta)
            h = 1e-6
            for j in range(layout.size):
                up, down = theta.values.copy(), theta.values.copy()
                up[j] += h
                down[j] -= h
                e_up = objective(theta.with_values(up))
                e_down = objective(theta.with_values(down))
                numeric = (e_up.value - e_down.value) / (2 * h)
                assert evaluation.gradient[j] == pytest.approx(numeric, rel=1e-6, abs=1e-7)
                numeric_row = (e_up.gradient - e_down.gradient) / (2 * h)
                assert np.allclose(evaluation.hessian[:, j], numeric_row, rtol=1e-4, atol=1e-6)

    @pytest.mark.parametrize("name", NAMES)
    def test_scores_sum_to_gradient(self, name, small_data):
        _, _, objective, _, theta = _case(name, small_data, np.random.default_rng(6))
        evaluation = objective(theta)
        assert evaluation.per_subject_scores.shape == (small_data.n, theta.layout.size)
        assert np.allclose(evaluation.per_subject_scores.sum(axis=0), evaluation.gradient, atol=1e-10)


class TestIdentities:
    def test_factorization(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            data = random_tiny_dataset(rng)
            layout = layout_for(nu=NU, miss=MISS_Q)
            theta = random_theta(layout, rng)
            joint = loglik_LstarQ(data, SPEC, NU, MISS_Q, theta)
            parts = loglik_LstarQ1(data, MISS_Q, theta) + loglik_LstarQ2(data, SPEC, NU, theta)
            assert joint.value == pytest.approx(parts.value, abs=1e-11)
            assert np.allclose(joint.gradient, parts.gradient, atol=1e-10)

    def test_permutation_invariance(self, small_data):
        order = np.random.default_rng(0).permutation(small_data.n)
        shuffled = small_data.subset(order)
        for name in NAMES:
            _, _, objective, _, theta = _case(name, small_data, np.random.default_rng(7))
            _, _, shuffled_objective, _, _ = _case(name, shuffled, np.random.default_rng(7))
            assert shuffled_objective(theta).value == pytest.approx(objective(theta).value, abs=1e-11)

    def test_constant_missingness_reduces_to_lstar(self):
        rows = [r if not (r[1] and not r[2]) else (r[0], True, True, 1, r[4], r[5]) for r in SMALL_ROWS]
        data = make_dataset(rows)
        constant = MissingnessModel.constant(MissingnessKind.LOGISTIC_TXY)
        layout = layout_for(miss=constant)
        theta = random_theta(layout, np.random.default_rng(3))
        value = loglik_LstarY(data, SPEC, constant, theta).value
        expected = loglik_Lstar(data, SPEC, theta).value + data.n_events * math.log(0.5)
        assert value == pytest.approx(expected, abs=1e-11)

    def test_gr_residual_blocks(self, small_data):
        layout = layout_for(miss=MISS_TX)
        theta = random_theta(layout, np.random.default_rng(12))
        system = gr_system(small_data, SPEC, MISS_TX, theta)
        beta = slice(0, 4)
        assert np.allclose(system.residual[beta], loglik_gr_L(small_data, SPEC, MISS_TX, theta).gradient[beta])
        eta = layout.slice("eta")
        assert np.allclose(system.residual[eta], loglik_Lstar(small_data, SPEC, theta).gradient[eta])
        gamma = layout.slice("gamma")
        assert np.allclose(system.residual[gamma], loglik_LstarQ1(small_data, MISS_TX, theta).gradient[gamma])

    def test_gr_jacobian_matches_numeric(self, small_data):
        layout = layout_for(miss=MISS_TX)
        theta = random_theta(layout, np.random.default_rng(13))
        analytic = gr_system(small_data, SPEC, MISS_TX, theta).jacobian
        numeric = gr_system(small_data, SPEC, MISS_TX, theta, jacobian="numeric").jacobian
        assert np.allclose(analytic, numeric, rtol=1e-4, atol=1e-6)


class TestEdgeCases:
    def test_no_events(self):
        data = make_dataset([(1.0, False, False, None, None, (0.0, 1.0)),
                             (2.0, False, False, None, None, (1.0, 0.0))])
        theta = ParameterVector(np.zeros(6), layout_for())
        with pytest.raises(FitError):
            loglik_Lstar(data, SPEC, theta)
        with pytest.raises(FitError):
            loglik_cca(data, SPEC, ParameterVector(np.zeros(4), layout_for(blocks=("beta",))))

    def test_lq2_requires_aux(self):
        rows = list(SMALL_ROWS)
        rows[0] = (2.0, True, True, 1, None, (0.5, 1.0))
        data = make_dataset(rows)
        layout = layout_for(nu=NU)
        with pytest.raises(DataError):
            loglik_LstarQ2(data, SPEC, NU, ParameterVector(np.zeros(layout.size), layout))

    def test_more_subtypes_in_data_than_model(self, small_data):
        spec = BaselineRatioSpec.power_law(n_subtypes=1)
        theta = ParameterVector(np.zeros(2), layout_for(spec=spec))
        with pytest.raises(ConfigurationError):
            loglik_Lstar(small_data, spec, theta)

    def test_gr_rejects_subtype_dependent_model(self, small_data):
        layout = layout_for(miss=MISS_Y)
        with pytest.raises(ConfigurationError):
            gr_system(small_data, SPEC, MISS_Y, ParameterVector(np.zeros(layout.size), layout))

    def test_ly_rejects_aux_model(self, small_data):
        layout = layout_for(miss=MISS_Q)
        with pytest.raises(ConfigurationError):
            loglik_LstarY(small_data, SPEC, MISS_Q, ParameterVector(np.zeros(layout.size), layout))

    def test_extreme_coefficients_stay_finite(self, small_data):
        layout = layout_for(blocks=("beta",))
        theta = ParameterVector(np.array([300.0, -300.0, 250.0, 10.0]), layout)
        assert np.isfinite(loglik_cca(small_data, SPEC, theta).value)
