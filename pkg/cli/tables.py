"""
Table Rendering
Plain-text tables: bias, SD and coverage blocks for simulation summaries, beta(exp(beta)) cells for fits
"""

import math
from typing import List, Optional, Sequence

import pandas as pd

from inference.config import ESTIMATOR_CONFIGS


def _number(value, digits: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return f"{value:.{digits}f}"


def format_estimate(estimate: float, digits: int = 3) -> str:
    """beta(exp(beta)), e.g. 0.200(1.221)"""
    return f"{estimate:.{digits}f}({math.exp(estimate):.{digits}f})"


def format_p_value(p: float) -> str:
    if math.isnan(p):
        return "NA"
    return "<0.001" if p < 0.001 else f"{p:.3f}"


def _align(rows: List[List[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(width) for cell, width in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def _merge_labels(rows: List[List[str]]) -> List[List[str]]:
    """Join the two label columns into one left-aligned column"""
    width = max(len(row[0]) for row in rows) + 2
    return [[f"{row[0]:<{width}}{row[1]}"] + row[2:] for row in rows]


def render_simulation_table(summary) -> str:
    """Bias(%), SD and CI-R per parameter (row blocks) and estimator (columns)"""
    table = summary.table
    estimators = list(dict.fromkeys(table['estimator']))
    header = ["", ""] + [ESTIMATOR_CONFIGS[e]['display_name'] for e in estimators]
    rows = [header]
    for parameter in dict.fromkeys(table['parameter']):
        block = table[table['parameter'] == parameter].set_index('estimator')
        truth = block['truth'].iloc[0]
        for i, (label, column, digits) in enumerate((("Bias(%)", 'relative_bias_percent', 2),
                                                     ("SD", 'monte_carlo_sd', 2),
                                                     ("CI-R", 'ci_coverage_rate', 2))):
            name = f"{parameter} ({truth:.3f})" if i == 0 else ""
            rows.append([name, label] + [_number(float(block.loc[e, column]), digits) for e in estimators])
    merged = _merge_labels(rows)

    lines = [
        f"Scenario: {summary.scenario_name}",
        f"Replications: {summary.replications}   %Missing subtype: {_number(100 * summary.mean_missing_fraction, 1)}%"
        f"   %Censored: {_number(100 * summary.mean_censoring_fraction, 1)}%",
        "",
        _align(merged),
    ]
    failures = table.drop_duplicates('estimator').set_index('estimator')['convergence_failures']
    if failures.sum() > 0:
        lines.append("")
        lines.append("Convergence failures: " + ", ".join(
            f"{ESTIMATOR_CONFIGS[e]['display_name']}={int(failures[e])}" for e in estimators))
    for warning in summary.warnings:
        lines.append("")
        lines.append(f"*** {warning} ***")
    return "\n".join(lines) + "\n"


def render_fit_table(coefficients: pd.DataFrame, estimator: str, subtype_names: Optional[Sequence[str]] = None,
                     level: float = 0.95) -> str:
    """One block per subtype: covariate, beta(exp(beta)), SE, CI, p"""
    percent = f"{100 * level:g}% CI"
    rows = [["", "", "beta(exp(beta))", "SE", percent, "p"]]
    for k, block in coefficients.groupby('subtype', sort=True):
        label = subtype_names[k - 1] if subtype_names and k - 1 < len(subtype_names) else f"Subtype {k}"
        for i, row in enumerate(block.itertuples(index=False)):
            rows.append([
                label if i == 0 else "",
                row.covariate,
                format_estimate(row.estimate),
                _number(row.std_error, 3),
                f"({_number(row.ci_lower, 3)}, {_number(row.ci_upper, 3)})",
                format_p_value(row.p_value),
            ])
    merged = _merge_labels(rows)
    return f"Estimator: {estimator}\n\n{_align(merged)}\n"
