#!/usr/bin/env python3
"""Incoherent-gain scaling eta(N) at strong disorder (delta=5).

Realization counts shrink with N to keep the total cost bounded; the
largest chains dominate the runtime. Use --threads to parallelize.
"""

import sys

from qbattery.cli import main

if __name__ == "__main__":
    sys.exit(main(["--preset", "fig4a", "--out", "runs/scaling"]
                  + sys.argv[1:]))
