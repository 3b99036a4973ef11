#!/usr/bin/env python3
"""Normalized internal energy u(t) and ergotropy-to-energy ratio Xi(t).

Runs the N=7 energy preset at delta in {0, 5} for all three initial states.
"""

import sys

from qbattery.cli import main

if __name__ == "__main__":
    sys.exit(main(["--preset", "app-b", "--out", "runs/energy"]
                  + sys.argv[1:]))
