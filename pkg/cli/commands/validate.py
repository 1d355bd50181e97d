"""
Validate Command
Check a CSV dataset against its schema and the record invariants
"""

from inference.config import ESTIMATOR_CONFIGS
from ..csv_io import CsvSchema, load_schema, parse_csv
from ..exit_codes import EXIT_FINDINGS, EXIT_OK

# Findings printed per category before truncating
MAX_LISTED = 50


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="Check a CSV dataset")
    parser.add_argument("--data", required=True, help="CSV data file")
    parser.add_argument("--schema", help="Schema file (key-value or JSON); default column names otherwise")
    parser.add_argument("--strata-col", help="Column holding the stratum code")
    parser.add_argument("--estimator", choices=sorted(ESTIMATOR_CONFIGS),
                        help="Intended estimator; aux-based estimators get warnings for blank aux on events")
    parser.set_defaults(handler=cmd_validate)


def _listing(title: str, entries) -> None:
    print(f"{title}: {len(entries)}")
    for entry in entries[:MAX_LISTED]:
        print(f"  {entry}")
    if len(entries) > MAX_LISTED:
        print(f"  ... {len(entries) - MAX_LISTED} more")


def cmd_validate(args) -> int:
    schema = load_schema(args.schema) if args.schema else CsvSchema()
    schema = schema.with_stratum(args.strata_col)
    needs_aux = bool(args.estimator and ESTIMATOR_CONFIGS[args.estimator]['requires_aux'])
    _, report = parse_csv(args.data, schema, needs_aux=needs_aux)

    print(f"File: {args.data}")
    if report.missing_columns:
        print(f"Missing columns: {', '.join(report.missing_columns)}")
        return EXIT_FINDINGS

    print(f"Rows: {report.rows}")
    print(f"Events: {report.events}")
    print(f"Observed subtypes: {report.observed_subtypes}")
    print(f"Missing subtype among events: {100 * report.missing_fraction:.1f}%")

    by_column = report.failures_by_column()
    if by_column:
        print("Parse failures by column: " + ", ".join(f"{c}={n}" for c, n in by_column.items()))
    _listing("Parse failures", [f"line {line} [{column}]: {message}"
                                for line, column, message in report.parse_failures])
    _listing("Invariant violations", [f"line {line}: {message}" for line, message in report.violations])
    if report.warnings:
        _listing(f"Warnings ({args.estimator} requires aux on every event)",
                 [f"line {line}: {message}" for line, message in report.warnings])

    return EXIT_OK if report.ok else EXIT_FINDINGS
