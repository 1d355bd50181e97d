"""
Simulate Command
Run a scenario's replications and write summary.csv, replications.csv and summary.txt
"""

import os
import time

from core.logger import logger, context_logger
from simulation.replications import replication_dataset, run_replications
from simulation.summary import replications_frame
from ..atomic import atomic_write_frame, atomic_write_text
from ..csv_io import CsvSchema, write_dataset, write_schema
from ..exit_codes import EXIT_OK
from ..keyvalue import load_scenario
from ..tables import render_simulation_table


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Run a simulation scenario")
    parser.add_argument("--scenario", required=True, help="Scenario key-value file")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--estimators", help="Comma-separated subset of cca,lq2,ly,gr,lstar")
    parser.add_argument("--reps", type=int, help="Override the number of replications")
    parser.add_argument("--seed", type=int, help="Override the scenario seed")
    parser.add_argument("--n", type=int, help="Override the sample size")
    parser.add_argument("--workers", type=int, help="Worker processes (default: available parallelism)")
    parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    parser.add_argument("--export-data", action="store_true",
                        help="Also write replication 1's dataset (data.csv) and its schema (schema.kv)")
    parser.set_defaults(handler=cmd_simulate)


def cmd_simulate(args) -> int:
    start_time = time.time()
    scenario = load_scenario(args.scenario).with_overrides(
        replications=args.reps,
        seed=args.seed,
        estimators=tuple(args.estimators.split(',')) if args.estimators else None,
        n=args.n,
    )
    context_logger.set_context(scenario=scenario.name)
    logger.info(f"Simulating {scenario.name}: n={scenario.n}, replications={scenario.replications}, "
                f"mechanism={scenario.mechanism.kind}")

    summary = run_replications(scenario, workers=args.workers, progress=args.progress or None)

    os.makedirs(args.out, exist_ok=True)
    atomic_write_frame(summary.table, os.path.join(args.out, "summary.csv"))
    atomic_write_frame(replications_frame(summary.results, scenario.n_subtypes),
                       os.path.join(args.out, "replications.csv"))
    rendered = render_simulation_table(summary)
    atomic_write_text(os.path.join(args.out, "summary.txt"), rendered)

    if args.export_data:
        schema = CsvSchema(covariates=("x",))
        write_dataset(replication_dataset(scenario, 1), os.path.join(args.out, "data.csv"), schema)
        write_schema(schema, os.path.join(args.out, "schema.kv"))

    print(rendered, end="")
    for warning in summary.warnings:
        logger.warning(warning)
    context_logger.log_performance("cmd_simulate", (time.time() - start_time) * 1000, out=args.out)
    context_logger.clear_context()
    return EXIT_OK
