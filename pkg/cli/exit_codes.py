"""
Exit Codes
Stable process exit status contract of the command-line tools
"""

from core.errors import SubtypeModelError

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def exit_code_for(error: BaseException) -> int:
    """Configuration and data problems are usage errors; everything else is numerical"""
    if isinstance(error, SubtypeModelError):
        return error.exit_code
    return EXIT_NUMERICAL
