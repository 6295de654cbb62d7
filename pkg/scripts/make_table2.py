#!/usr/bin/env python3
"""Reproduce the 2.5% critical-value grid and its residual reports.

Writes per-design criterion tables, the formatted grid, and a
similarity-defect summary under out/table2/.
"""

import sys

from twosample.cli import main

if __name__ == "__main__":
    sys.exit(main(["table2", "--alpha", "0.025", "--out", "out/table2"]))
