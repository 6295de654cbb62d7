#!/usr/bin/env python3
"""Calibration study: 5000-replicate runs with confidence assignment.

Two families, fixed protocol seed:
  * similar-criterion ("ideal") confidences on the 6x6 design at
    psi = 30 and 45 degrees, checked against the uniform diagonal
    over the assignable range;
  * variance-angle confidences on the 2x2 and 3x2 designs at
    zeta = 1, checked against the exact theoretical curve.

Outputs (records, ECDF vertices, manifests) land under out/calibration/.
"""

import sys

from twosample.cli import main

SEED = 101
RUNS = [
    ["simulate", "--n1", "6", "--n2", "6", "--psi-deg", "45",
     "--family", "ideal", "--out", "out/calibration/ideal_6x6_psi45"],
    ["simulate", "--n1", "6", "--n2", "6", "--psi-deg", "30",
     "--family", "ideal", "--out", "out/calibration/ideal_6x6_psi30"],
    ["simulate", "--n1", "2", "--n2", "2", "--zeta", "1",
     "--family", "fisher-behrens", "--out", "out/calibration/fb_2x2"],
    ["simulate", "--n1", "3", "--n2", "2", "--zeta", "1",
     "--family", "fisher-behrens", "--out", "out/calibration/fb_3x2"],
]

if __name__ == "__main__":
    worst = 0
    for argv in RUNS:
        print("$ twosample", " ".join(argv + ["--seed", str(SEED), "--reps", "5000"]))
        worst = max(worst, main(argv + ["--seed", str(SEED), "--reps", "5000"]))
        print()
    sys.exit(worst)
