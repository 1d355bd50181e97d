"""
Calibrate Command
Print the baseline level that gives a scenario its target censoring fraction
"""

from simulation.calibration import calibrate_baseline_level
from ..exit_codes import EXIT_OK
from ..keyvalue import load_scenario


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("calibrate", help="Calibrate the baseline hazard level")
    parser.add_argument("--scenario", required=True, help="Scenario key-value file")
    parser.add_argument("--target", type=float, default=0.70, help="Target censoring fraction")
    parser.add_argument("--draws", type=int, default=200000, help="Monte Carlo draws")
    parser.add_argument("--seed", type=int, default=0)
    parser.set_defaults(handler=cmd_calibrate)


def cmd_calibrate(args) -> int:
    scenario = load_scenario(args.scenario)
    level = calibrate_baseline_level(scenario, target=args.target, n=args.draws, seed=args.seed)
    print(f"baseline_level = {level:.6g}")
    return EXIT_OK
