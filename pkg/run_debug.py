"""
Debug runner
Runs a single replication of a scenario in-process with DEBUG logging so that
breakpoints in the likelihood and solver code are hit
"""

import sys

from core.logger import set_level
from cli.keyvalue import load_scenario
from cli.tables import render_simulation_table
from simulation.replications import run_replications

if __name__ == "__main__":
    scenario_path = sys.argv[1] if len(sys.argv) > 1 else "scenarios/always_observed.kv"
    set_level("DEBUG")
    scenario = load_scenario(scenario_path).with_overrides(replications=1)
    summary = run_replications(scenario, workers=1, progress=False)
    print(render_simulation_table(summary), end="")
