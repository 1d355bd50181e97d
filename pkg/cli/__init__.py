"""
CLI Module
Command-line surface: simulate, fit, validate and calibrate subcommands
"""

import argparse
import sys
from typing import List, Optional

from core.errors import SubtypeModelError
from core.logger import logger, set_level
from .commands import COMMANDS
from .exit_codes import EXIT_NUMERICAL, EXIT_OK, exit_code_for


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subtype-ph",
        description="Proportional hazards regression for competing risks with missing subtype",
    )
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), type=str.upper,
                        help="Override the configured logging level")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the subcommand and map failures to exit codes"""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)

    try:
        return args.handler(args)
    except SubtypeModelError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}: {e}")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


__all__ = ["build_parser", "main", "EXIT_OK"]
