"""
Replication Summaries
Relative bias, Monte Carlo SD, coverage and failure counts per estimator and parameter
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd

from core.config import settings
from core.logger import context_logger
from inference.config import ESTIMATOR_CONFIGS

SUMMARY_COLUMNS = [
    'estimator', 'parameter', 'truth', 'mean_estimate', 'bias', 'relative_bias_percent', 'monte_carlo_sd',
    'mean_se', 'ci_coverage_rate', 'replications_used', 'convergence_failures', 'mean_missing_fraction',
    'warning',
]

REPLICATION_COLUMNS = [
    'replication', 'estimator', 'converged', 'iterations', 'n_events', 'missing_fraction',
    'censoring_fraction', 'message',
]


def parameter_name(k: int) -> str:
    return f"beta_{k}"


@dataclass(frozen=True)
class ReplicationSummary:
    scenario_name: str
    replications: int
    confidence_level: float
    table: pd.DataFrame = field(repr=False)
    mean_missing_fraction: float
    mean_censoring_fraction: float
    warnings: Tuple[str, ...] = ()
    results: Tuple = field(default=(), repr=False)

    def row(self, estimator: str, parameter: str) -> dict:
        match = self.table[(self.table['estimator'] == estimator) & (self.table['parameter'] == parameter)]
        if match.empty:
            raise KeyError(f"{estimator}/{parameter}")
        return match.iloc[0].to_dict()

    def relative_bias(self, estimator: str, k: int) -> float:
        return float(self.row(estimator, parameter_name(k))['relative_bias_percent'])

    def coverage(self, estimator: str, k: int) -> float:
        return float(self.row(estimator, parameter_name(k))['ci_coverage_rate'])

    @property
    def failing_estimators(self) -> List[str]:
        flagged = self.table[self.table['warning'] != ""]
        return list(dict.fromkeys(flagged['estimator']))


def _moments(values: np.ndarray) -> Tuple[float, float]:
    if values.size == 0:
        return float('nan'), float('nan')
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if values.size > 1 else float('nan')
    return mean, sd


def summarize(scenario, results, level: float) -> ReplicationSummary:
    """Aggregate converged replications; failed ones are excluded and counted"""
    threshold = settings.simulation.failure_warning_fraction
    missing = float(np.mean([r.missing_fraction for r in results])) if results else float('nan')
    censoring = float(np.mean([r.censoring_fraction for r in results])) if results else float('nan')

    rows = []
    warnings = []
    for estimator in scenario.estimators:
        outcomes = [r.outcomes[estimator] for r in results]
        used = [o for o in outcomes if o.converged]
        failures = len(outcomes) - len(used)
        warning = ""
        if outcomes and failures / len(outcomes) > threshold:
            display = ESTIMATOR_CONFIGS[estimator]['display_name']
            warning = f"WARNING: {display} failed on {failures} of {len(outcomes)} replications"
            warnings.append(warning)
            context_logger.warning("Estimator failure rate above threshold", estimator=display,
                                   failures=failures, replications=len(outcomes), scenario=scenario.name)

        for k in range(1, scenario.n_subtypes + 1):
            truth = float(scenario.true_beta[k - 1])
            estimates = np.array([o.estimates[k - 1] for o in used], dtype=float)
            errors = np.array([o.standard_errors[k - 1] for o in used], dtype=float)
            hits = np.array([o.covered[k - 1] for o in used], dtype=bool)
            mean, sd = _moments(estimates)
            bias = mean - truth
            rows.append({
                'estimator': estimator,
                'parameter': parameter_name(k),
                'truth': truth,
                'mean_estimate': mean,
                'bias': bias,
                'relative_bias_percent': 100.0 * bias / truth if truth != 0 else float('nan'),
                'monte_carlo_sd': sd,
                'mean_se': float(np.mean(errors)) if errors.size else float('nan'),
                'ci_coverage_rate': float(np.mean(hits)) if hits.size else float('nan'),
                'replications_used': len(used),
                'convergence_failures': failures,
                'mean_missing_fraction': missing,
                'warning': warning,
            })

    return ReplicationSummary(
        scenario_name=scenario.name,
        replications=len(results),
        confidence_level=level,
        table=pd.DataFrame(rows, columns=SUMMARY_COLUMNS),
        mean_missing_fraction=missing,
        mean_censoring_fraction=censoring,
        warnings=tuple(warnings),
        results=tuple(results),
    )


def replications_frame(results, n_subtypes: int = 2) -> pd.DataFrame:
    """Raw per-replication estimates, one row per replication and estimator"""
    per_parameter = []
    for k in range(1, n_subtypes + 1):
        name = parameter_name(k)
        per_parameter.extend([name, f"{name}_se", f"{name}_covered"])
    rows = []
    for result in results:
        for estimator, outcome in result.outcomes.items():
            row = {
                'replication': result.replication,
                'estimator': estimator,
                'converged': outcome.converged,
                'iterations': outcome.iterations,
                'n_events': result.n_events,
                'missing_fraction': result.missing_fraction,
                'censoring_fraction': result.censoring_fraction,
                'message': outcome.message,
            }
            for k in range(1, n_subtypes + 1):
                name = parameter_name(k)
                row[name] = outcome.estimates[k - 1]
                row[f"{name}_se"] = outcome.standard_errors[k - 1]
                row[f"{name}_covered"] = outcome.covered[k - 1]
            rows.append(row)
    return pd.DataFrame(rows, columns=REPLICATION_COLUMNS[:2] + per_parameter + REPLICATION_COLUMNS[2:])
