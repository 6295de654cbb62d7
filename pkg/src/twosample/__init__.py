"""Numerical tools for the two-sample problem with unequal variances.

Exact finite-sample probabilities for the Welch-type statistic V, iterative
solution of the similarity integral equation ("ideal" criteria), Fisher-Behrens
criteria, power comparison, Monte Carlo calibration runs and detection of the
Linnik consistency breakdown at large significance levels.
"""

__version__ = "0.1.0"

from .design import Design, StatPoint, VariancePoint
from .distributions import INFINITY

__all__ = ["Design", "StatPoint", "VariancePoint", "INFINITY", "__version__"]
