"""
Tests for the simulation module: scenarios, the data generator, calibration,
replications and their summaries
"""

import math
import os

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError
from scipy.stats import kstest

from cli.keyvalue import load_scenario
from core.errors import ConfigurationError
from model import SubjectRecord
from simulation import (
    MarqMechanism, Scenario, assign_missingness, calibrate_baseline_level, cumulative_hazard, generate_dataset,
    replication_dataset, replications_frame, run_replications, solve_marq_coefficients, subtype_two_probability,
    true_missingness_model,
)
from simulation.generator import invert_cumulative_hazard
from simulation.replications import EstimatorOutcome, ReplicationResult
from simulation.summary import summarize

SCENARIOS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")


class TestScenario:
    def test_defaults(self):
        scenario = Scenario()
        assert scenario.n_subtypes == 2
        assert scenario.mechanism.kind == "marq"
        assert scenario.estimators == ("cca", "lq2", "ly", "gr")

    def test_exp_gamma_is_converted(self):
        scenario = Scenario.model_validate({'mechanism': {'kind': 'martxq', 'exp_gamma_q': '5'}})
        assert scenario.mechanism.gamma_q == pytest.approx(math.log(5.0))

    @pytest.mark.parametrize("values", [
        {'mechanism': {'kind': 'martxq', 'exp_gamma_q': '-1'}},
        {'mechanism': {'kind': 'nmar', 'exp_gamma_y': '5', 'gamma_y': '1'}},
        {'mechanism': {'kind': 'marq', 'p_obs_q0': '1.0'}},
        {'estimators': 'cca, kaplan'},
        {'estimators': 'cca, cca'},
        {'covariate_prevalence': 0.0},
        {'true_eta': '0.0, 1.0'},
        {'unknown_key': 1},
    ])
    def test_invalid_scenarios(self, values):
        with pytest.raises(ValidationError):
            Scenario.model_validate(values)

    def test_overrides_are_revalidated(self):
        scenario = Scenario().with_overrides(replications=3, seed=9, estimators=("cca",), n=100)
        assert (scenario.replications, scenario.seed, scenario.estimators, scenario.n) == (3, 9, ("cca",), 100)
        with pytest.raises(ValidationError):
            Scenario().with_overrides(replications=0)


class TestMechanisms:
    def test_marq_coefficients(self):
        gamma_0, gamma_q = solve_marq_coefficients(0.2, 0.8)
        assert gamma_0 == pytest.approx(-1.3863, abs=1e-4)
        assert gamma_q == pytest.approx(2.7726, abs=1e-4)

    @pytest.mark.parametrize("p0, p1", [(0.0, 0.5), (0.5, 1.0), (-0.1, 0.5)])
    def test_marq_coefficients_need_open_interval(self, p0, p1):
        with pytest.raises(ConfigurationError):
            solve_marq_coefficients(p0, p1)

    def test_true_models(self):
        assert true_missingness_model(Scenario(mechanism={'kind': 'always'}).mechanism) is None
        marq = true_missingness_model(MarqMechanism(p_obs_q0=0.2, p_obs_q1=0.8))
        assert marq.uses_q and not marq.uses_y
        nmar = true_missingness_model(Scenario(mechanism={'kind': 'nmar'}).mechanism)
        assert nmar.uses_y and nmar.time_cuts == (50.0,)

    def test_assign_missingness(self):
        rng = np.random.default_rng(0)
        censored = SubjectRecord(time=3.0, event=False, covariates=(1.0,))
        event = SubjectRecord(time=3.0, event=True, covariates=(1.0,), aux=1, subtype=2, subtype_observed=True)
        assert not assign_missingness(censored, MarqMechanism(), rng)
        assert assign_missingness(event, Scenario(mechanism={'kind': 'always'}).mechanism, rng)
        draws = [assign_missingness(event, MarqMechanism(p_obs_q0=0.2, p_obs_q1=0.8), rng) for _ in range(4000)]
        assert np.mean(draws) == pytest.approx(0.8, abs=0.03)


class TestGenerator:
    def test_subtype_probability(self):
        scenario = Scenario()
        assert subtype_two_probability(scenario, 10.0, 0.0) == pytest.approx(0.37 / 1.37)

    @pytest.mark.parametrize("eta", [(0.037, 1.0), (0.037, 0.5), (0.2, -0.5), (0.05, 2.0)])
    def test_inversion_round_trip(self, eta):
        scenario = Scenario(true_eta=eta)
        rng = np.random.default_rng(1)
        x = (rng.random(500) < 0.4).astype(float)
        target = rng.standard_exponential(500)
        t = invert_cumulative_hazard(scenario, x, target)
        assert np.allclose(cumulative_hazard(scenario, t, x), target, rtol=1e-9, atol=1e-12)

    def test_replications_are_reproducible(self, tiny_scenario):
        first = replication_dataset(tiny_scenario, 3)
        assert first.same_as(replication_dataset(tiny_scenario, 3))
        assert not first.same_as(replication_dataset(tiny_scenario, 4))

    def test_same_generator_state_same_data(self):
        scenario = Scenario(n=300)
        a = generate_dataset(scenario, np.random.default_rng(42))
        b = generate_dataset(scenario, np.random.default_rng(42))
        assert a.same_as(b)

    def test_survival_matches_cumulative_hazard(self):
        scenario = Scenario(n=100000, seed=3, censoring={'enabled': False}, mechanism={'kind': 'always'})
        data = replication_dataset(scenario, 1)
        assert data.event.all()
        exposure = cumulative_hazard(scenario, data.time, data.covariates[:, 0])
        assert kstest(exposure, 'expon').pvalue > 0.01

    def test_default_design_rates(self):
        data = replication_dataset(Scenario(n=20000, seed=17), 1)
        assert data.censoring_fraction == pytest.approx(0.70, abs=0.02)
        assert data.missing_fraction == pytest.approx(0.564, abs=0.03)
        assert np.all(data.aux[~data.event] == -1)
        assert np.all(data.aux[data.event] >= 0)

    def test_always_observed(self):
        data = replication_dataset(Scenario(n=20000, seed=17, mechanism={'kind': 'always'}), 1)
        assert data.missing_fraction == 0.0
        share_two = np.mean(data.subtype[data.event] == 2)
        assert share_two == pytest.approx(0.5726, abs=0.03)


class TestCalibration:
    def test_default_level(self):
        level = calibrate_baseline_level(Scenario(), target=0.70, n=50000, seed=0)
        assert level == pytest.approx(0.00363, rel=0.05)

    def test_invalid_requests(self):
        with pytest.raises(ConfigurationError):
            calibrate_baseline_level(Scenario(), target=1.5, n=100)
        with pytest.raises(ConfigurationError):
            calibrate_baseline_level(Scenario(censoring={'enabled': False}), n=100)


def outcome(name, estimates=None):
    if estimates is None:
        nan = (float('nan'), float('nan'))
        return EstimatorOutcome(name, False, nan, nan, (False, False), message="did not converge")
    return EstimatorOutcome(name, True, estimates, (0.1, 0.2), (True, False), iterations=5)


class TestSummary:
    @pytest.fixture
    def results(self):
        estimates = [(0.2, 0.9), (0.3, 1.0), (0.25, 0.95), None, None]
        return [
            ReplicationResult(replication=i + 1, n_events=100, missing_fraction=0.5 + 0.01 * i,
                              censoring_fraction=0.7, outcomes={'cca': outcome('cca', e), 'lq2': outcome('lq2', (0.2, 0.9))})
            for i, e in enumerate(estimates)
        ]

    def test_statistics(self, results):
        scenario = Scenario(name="synthetic", estimators=("cca", "lq2"), replications=5)
        summary = summarize(scenario, results, 0.95)
        row = summary.row("cca", "beta_1")
        assert row['mean_estimate'] == pytest.approx(0.25)
        assert row['monte_carlo_sd'] == pytest.approx(0.05)
        assert row['relative_bias_percent'] == pytest.approx(100 * (0.25 - 0.223) / 0.223)
        assert row['replications_used'] == 3
        assert row['convergence_failures'] == 2
        assert summary.coverage("cca", 1) == 1.0
        assert summary.coverage("cca", 2) == 0.0
        assert summary.mean_missing_fraction == pytest.approx(0.52)

    def test_failure_warning(self, results):
        summary = summarize(Scenario(estimators=("cca", "lq2")), results, 0.95)
        assert summary.warnings == ("WARNING: CCA failed on 2 of 5 replications",)
        assert summary.failing_estimators == ["cca"]
        assert summary.row("lq2", "beta_2")['warning'] == ""

    def test_zero_truth_gives_undefined_relative_bias(self, results):
        summary = summarize(Scenario(true_beta=(0.0, 0.916), estimators=("cca", "lq2")), results, 0.95)
        assert math.isnan(summary.relative_bias("lq2", 1))

    def test_replications_frame(self, results):
        frame = replications_frame(results)
        assert len(frame) == 10
        assert list(frame.columns[:8]) == ['replication', 'estimator', 'beta_1', 'beta_1_se', 'beta_1_covered',
                                           'beta_2', 'beta_2_se', 'beta_2_covered']
        assert frame['converged'].sum() == 8


@pytest.mark.slow
class TestReplications:
    def test_results_are_ordered_and_complete(self, tiny_scenario):
        summary = run_replications(tiny_scenario, estimators=("cca", "lq2"), workers=1, progress=False)
        assert [r.replication for r in summary.results] == [1, 2, 3]
        assert list(summary.table['estimator'].unique()) == ["cca", "lq2"]
        assert summary.table['convergence_failures'].sum() == 0

    def test_worker_count_does_not_change_results(self, tiny_scenario):
        serial = run_replications(tiny_scenario, workers=1, progress=False)
        parallel = run_replications(tiny_scenario, workers=2, progress=False)
        pd.testing.assert_frame_equal(serial.table, parallel.table)
        pd.testing.assert_frame_equal(replications_frame(serial.results), replications_frame(parallel.results))

    def test_always_observed_collapses(self, always_scenario):
        summary = run_replications(always_scenario, workers=1, progress=False)
        assert summary.mean_missing_fraction == 0.0
        for k in (1, 2):
            assert summary.row("gr", f"beta_{k}")['mean_estimate'] == pytest.approx(
                summary.row("cca", f"beta_{k}")['mean_estimate'], abs=1e-6)


def reference_run(name: str):
    return run_replications(load_scenario(os.path.join(SCENARIOS, f"{name}.kv")), progress=False)


@pytest.mark.monte_carlo
class TestReferenceScenarios:
    def test_marq_02_08(self):
        summary = reference_run("marq_02_08")
        assert summary.relative_bias("lq2", 1) == pytest.approx(-0.58, abs=3)
        assert summary.relative_bias("lq2", 2) == pytest.approx(-0.77, abs=2)
        assert summary.relative_bias("cca", 1) == pytest.approx(57.86, abs=8)
        assert summary.relative_bias("ly", 1) == pytest.approx(-0.54, abs=3)
        assert summary.coverage("lq2", 1) == pytest.approx(0.95, abs=0.03)

    def test_marq_08_08(self):
        summary = reference_run("marq_08_08")
        assert summary.relative_bias("cca", 1) == pytest.approx(18.29, abs=8)

    def test_marq_08_02_small_sample(self):
        summary = reference_run("marq_08_02_n500")
        assert summary.relative_bias("lq2", 2) == pytest.approx(0.49, abs=4)
        assert summary.relative_bias("cca", 2) == pytest.approx(16.63, abs=6)

    def test_martxq(self):
        summary = reference_run("martxq_5")
        gr, lq2 = summary.relative_bias("gr", 1), summary.relative_bias("lq2", 1)
        assert gr == pytest.approx(-21.18, abs=5)
        assert lq2 == pytest.approx(-0.93, abs=5)
        assert abs(gr) > 15 > abs(lq2)

    def test_nmar(self):
        summary = reference_run("nmar_5")
        assert summary.relative_bias("ly", 2) == pytest.approx(-0.62, abs=3)
        assert summary.relative_bias("gr", 2) == pytest.approx(-22.55, abs=6)
        assert summary.relative_bias("lq2", 2) == pytest.approx(-10.44, abs=5)
