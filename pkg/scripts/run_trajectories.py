#!/usr/bin/env python3
"""Ensemble-averaged ergotropy decay curves for the three initial states.

Runs the trajectory presets (N=2 and N=7 chains, clean and strongly
disordered) and drops one CSV per preset under runs/trajectories/.
"""

import sys

from qbattery.cli import main

PRESETS = ["fig1a", "fig1b", "fig3a", "fig3b"]

if __name__ == "__main__":
    extra = sys.argv[1:]
    for preset in PRESETS:
        rc = main(["--preset", preset, "--out", "runs/trajectories"] + extra)
        if rc != 0:
            sys.exit(rc)
