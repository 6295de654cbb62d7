#!/usr/bin/env python3
"""Scan rejection regions across significance levels for crossings.

The 2x2 design (one degree of freedom per sample) shows the
cross-level inconsistency: the 25% and 30% regions cross, so the
scan brackets the changeover level inside (0.25, 0.30).  The 10x10
design stays nested over the whole grid.  Crossing intervals are
written under out/linnik/.
"""

import sys

from twosample.cli import main

SCANS = [
    ["linnik", "--n1", "2", "--n2", "2",
     "--levels", "0.25,0.3,0.35,0.4", "--out", "out/linnik/2x2"],
    ["linnik", "--n1", "10", "--n2", "10",
     "--levels", "0.01,0.05,0.1,0.15,0.2,0.25", "--out", "out/linnik/10x10"],
]

if __name__ == "__main__":
    worst = 0
    for argv in SCANS:
        print("$ twosample", " ".join(argv))
        worst = max(worst, main(argv))
        print()
    sys.exit(worst)
