"""
Command-line entry point
Usage: python main.py {simulate,fit,validate,calibrate} ...
"""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
