#!/usr/bin/env python3
"""Compare the similar criterion's power with the harmonic-ratio t test.

At zeta = 1 the t test with nu = nu1 + nu2 degrees of freedom is the
benchmark.  Equal designs (11x11, 16x16) should track it to within
about 1e-3; the lopsided 121x7 design shows the worst-case efficiency
loss.  Tables land under out/power/.
"""

import sys

from twosample.cli import main

COMPARISONS = [
    ["power", "--n1", "11", "--n2", "11", "--alpha", "0.025",
     "--out", "out/power/11x11"],
    ["power", "--n1", "16", "--n2", "16", "--alpha", "0.025",
     "--out", "out/power/16x16"],
    ["power", "--n1", "121", "--n2", "7", "--alpha", "0.025",
     "--out", "out/power/121x7"],
]

if __name__ == "__main__":
    worst = 0
    for argv in COMPARISONS:
        print("$ twosample", " ".join(argv))
        worst = max(worst, main(argv))
        print()
    sys.exit(worst)
