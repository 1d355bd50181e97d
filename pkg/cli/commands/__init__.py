"""
CLI Commands
One module per subcommand, each exposing add_parser and its cmd_* handler
"""

from . import calibrate, fit, simulate, validate
from .calibrate import cmd_calibrate
from .fit import cmd_fit
from .simulate import cmd_simulate
from .validate import cmd_validate

COMMANDS = (simulate, fit, validate, calibrate)

__all__ = ["COMMANDS", "cmd_simulate", "cmd_fit", "cmd_validate", "cmd_calibrate"]
