"""
Replication Engine
Runs independent seeded replications of a scenario (in parallel when asked)
and hands the per-replication results, keyed by index, to the summary
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from core.config import settings
from core.errors import SubtypeModelError
from core.logger import context_logger
from inference.estimators import estimation_service
from inference.wald import covers
from likelihoods.dataset import Dataset
from .generator import generate_dataset
from .mechanisms import fitted_models
from .scenario import Scenario
from .summary import ReplicationSummary, summarize


@dataclass(frozen=True)
class EstimatorOutcome:
    """beta estimates for one estimator in one replication (NaN when the fit failed)"""
    estimator: str
    converged: bool
    estimates: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    covered: Tuple[bool, ...]
    iterations: int = 0
    message: str = ""


@dataclass(frozen=True)
class ReplicationResult:
    replication: int
    n_events: int
    missing_fraction: float
    censoring_fraction: float
    outcomes: Dict[str, EstimatorOutcome] = field(default_factory=dict)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Counter-based stream: depends only on (seed, replication), never on scheduling"""
    return np.random.default_rng(np.random.SeedSequence([seed, replication]))


def replication_dataset(scenario: Scenario, replication: int) -> Dataset:
    return generate_dataset(scenario, replication_rng(scenario.seed, replication))


def _failed(estimator: str, n_subtypes: int, message: str) -> EstimatorOutcome:
    nan = tuple(float('nan') for _ in range(n_subtypes))
    return EstimatorOutcome(estimator, False, nan, nan, tuple(False for _ in range(n_subtypes)), message=message)


def run_replication(scenario: Scenario, replication: int, level: float = 0.95) -> ReplicationResult:
    """Generate one dataset and fit every estimator of the scenario to it"""
    start_time = time.time()
    data = replication_dataset(scenario, replication)
    model = fitted_models(scenario)
    truth = np.asarray(scenario.true_beta, dtype=float)

    outcomes = {}
    for name in scenario.estimators:
        try:
            fit = estimation_service.fit(name, data, model)
        except SubtypeModelError as e:
            outcomes[name] = _failed(name, scenario.n_subtypes, f"{e.error_code}: {e.message}")
            continue
        if not fit.converged:
            outcomes[name] = _failed(name, scenario.n_subtypes, fit.message or "did not converge")
            continue
        estimates = tuple(float(fit.beta(k)[0]) for k in range(1, scenario.n_subtypes + 1))
        errors = tuple(float(fit.beta_standard_errors(k)[0]) for k in range(1, scenario.n_subtypes + 1))
        covered = tuple(bool(covers(fit, k, truth[k - 1], level)[0]) for k in range(1, scenario.n_subtypes + 1))
        outcomes[name] = EstimatorOutcome(name, True, estimates, errors, covered, iterations=fit.iterations)

    failures = [name for name, outcome in outcomes.items() if not outcome.converged]
    context_logger.log_replication(replication, failures, duration=(time.time() - start_time) * 1000,
                                   scenario=scenario.name)
    return ReplicationResult(
        replication=replication,
        n_events=data.n_events,
        missing_fraction=data.missing_fraction,
        censoring_fraction=data.censoring_fraction,
        outcomes=outcomes,
    )


def _resolve_workers(workers: Optional[int]) -> int:
    chosen = workers or settings.simulation.workers or os.cpu_count() or 1
    return max(1, int(chosen))


def _run_serial(scenario: Scenario, indices: Iterable[int], level: float, progress: bool) -> Dict[int, ReplicationResult]:
    iterator = tqdm(list(indices), desc=f"Replications ({scenario.name})") if progress else indices
    return {index: run_replication(scenario, index, level) for index in iterator}


def _run_parallel(scenario: Scenario, indices: List[int], level: float, workers: int,
                  progress: bool) -> Dict[int, ReplicationResult]:
    results = {}
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(run_replication, scenario, index, level): index for index in indices}
        pbar = tqdm(total=len(futures), desc=f"Replications ({scenario.name})") if progress else None
        for future in as_completed(futures):
            results[futures[future]] = future.result()
            if pbar is not None:
                pbar.update(1)
        if pbar is not None:
            pbar.close()
    return results


def run_replications(scenario: Scenario, estimators: Optional[Iterable[str]] = None,
                     workers: Optional[int] = None, progress: Optional[bool] = None,
                     level: Optional[float] = None) -> ReplicationSummary:
    """
    Run scenario.replications replications and summarize them

    Args:
        scenario: simulation design (its estimators are replaced when `estimators` is given)
        estimators: subset of {cca, lq2, ly, gr, lstar}
        workers: process count; 1 runs in this process
        progress: show a tqdm progress bar
        level: nominal confidence level for coverage

    Returns:
        ReplicationSummary whose results are ordered by replication index
    """
    if estimators is not None:
        scenario = scenario.with_overrides(estimators=tuple(estimators))
    level = level if level is not None else settings.simulation.confidence_level
    progress = settings.simulation.progress_bar if progress is None else progress
    workers = min(_resolve_workers(workers), scenario.replications)
    indices = list(range(1, scenario.replications + 1))

    start_time = time.time()
    context_logger.info("Starting replications", scenario=scenario.name, replications=scenario.replications,
                        workers=workers, estimators=",".join(scenario.estimators))
    if workers == 1:
        by_index = _run_serial(scenario, indices, level, progress)
    else:
        by_index = _run_parallel(scenario, indices, level, workers, progress)

    results = [by_index[index] for index in indices]
    context_logger.log_performance("run_replications", (time.time() - start_time) * 1000,
                                   scenario=scenario.name, replications=len(results))
    return summarize(scenario, results, level)
