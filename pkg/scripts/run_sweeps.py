#!/usr/bin/env python3
"""Disorder-strength sweeps: half-life tau(delta), gain eta(delta), and the
saturating-exponential fit of the coherent half-life curve.

fig2 (N=2) is quick; fig5 (N=7) and fig4b (N=7) take a while at the default
realization counts. Pass e.g. --realizations 20 --threads 4 to shrink them.
"""

import sys

from qbattery.cli import main

PRESETS = ["fig2", "fig4b", "fig5"]

if __name__ == "__main__":
    extra = sys.argv[1:]
    for preset in PRESETS:
        rc = main(["--preset", preset, "--out", "runs/sweeps"] + extra)
        if rc != 0:
            sys.exit(rc)
