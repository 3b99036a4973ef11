#!/usr/bin/env python3
"""Ergotropy rate decomposition for the coherent battery at N=7.

Emits the ensemble-averaged coherent-exchange and dissipative contributions
to dU/dt, plus the passive-energy rate, for delta in {0, 2.5, 5}.
"""

import sys

from qbattery.cli import main

if __name__ == "__main__":
    sys.exit(main(["--preset", "new-fig", "--out", "runs/rates"]
                  + sys.argv[1:]))
