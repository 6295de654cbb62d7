"""Critical-value curves: lattices, smoothing, tables and interpolation.

A test criterion is a map theta in [0, 90] degrees -> critical value (or
equivalently c in [0, 1] -> value, with c = sin^2 theta).  Solved criteria
live on one of two fixed lattices:

* ``psi91``  - the 91-point arctan-compressed angle lattice used for finite
  designs; dense near 0 and 90 degrees where the solution varies fastest.
* ``c101``   - 101 equidistant points of c in [0, 1], used for the limiting
  criteria when the first sample size is infinite.

Between nodes, criteria are interpolated by a C2 cubic spline, linear in
the node values and exact at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .design import Design, c_from_theta_deg, theta_deg_from_c
from .distributions import INFINITY

__all__ = [
    "C101_SIZE",
    "PSI_SIZE",
    "ConstantCriterion",
    "CriterionTable",
    "TableCriterion",
    "build_c_lattice",
    "build_psi_lattice",
    "smooth",
]

PSI_SIZE = 91
C101_SIZE = 101


def build_psi_lattice() -> np.ndarray:
    """The 91 angles psi_i = 45 + atan((i - 45)/45) in degrees, i = 0..90.

    Endpoints are set to exactly 0 and 90, and the upper half is mirrored
    from the lower so that psi_i + psi_{90-i} = 90 holds exactly.
    """
    nodes = np.empty(PSI_SIZE)
    for i in range(46):
        nodes[i] = 45.0 + np.degrees(np.arctan((i - 45.0) / 45.0))
    nodes[0] = 0.0
    for i in range(46, PSI_SIZE):
        nodes[i] = 90.0 - nodes[PSI_SIZE - 1 - i]
    return nodes


def build_c_lattice() -> np.ndarray:
    """101 equidistant c values 0.00, 0.01, ..., 1.00."""
    return np.arange(C101_SIZE) / 100.0


def smooth(values) -> np.ndarray:
    """One pass of the 3-point running mean; endpoints are left unchanged."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise ValueError(f"need a 1-d vector of at least 3 values, got shape {v.shape}")
    out = v.copy()
    out[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    return out


class ConstantCriterion:
    """A z-independent critical value."""

    def __init__(self, value: float):
        self.value = float(value)
        self.knots_c = None

    def at_theta(self, theta_deg):
        return np.full_like(np.asarray(theta_deg, dtype=float), self.value)

    def at_c(self, c):
        return np.full_like(np.asarray(c, dtype=float), self.value)

    def negated(self) -> "ConstantCriterion":
        return ConstantCriterion(-self.value)


class TableCriterion:
    """Node table + C2 cubic-spline interpolation, exact at the nodes.

    The spline is linear in the node values, which the criterion solver
    exploits for an analytic Jacobian; a shape-preserving interpolant with
    data-dependent slope limiting would break that linearity (and its limiter
    switches at round-off scale between near-equal neighbouring values).

    ``domain`` is "theta" (nodes in degrees) or "c".  Evaluation points are
    clamped to the lattice range, so tiny round-off excursions outside
    [0, 90] or [0, 1] never extrapolate.
    """

    def __init__(self, nodes, values, domain: str = "theta", sign: float = 1.0):
        if domain not in ("theta", "c"):
            raise ValueError(f"unknown domain {domain!r}")
        self.domain = domain
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.sign = sign
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape:
            raise ValueError("nodes and values must be 1-d and of equal length")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("lattice nodes must be strictly increasing")
        self._interp = CubicSpline(self.nodes, self.values, extrapolate=True)
        if domain == "theta":
            self.knots_c = c_from_theta_deg(self.nodes)
        else:
            self.knots_c = self.nodes.copy()

    def _eval(self, x):
        clamped = np.clip(np.asarray(x, dtype=float), self.nodes[0], self.nodes[-1])
        return self.sign * self._interp(clamped)

    def at_theta(self, theta_deg):
        if self.domain == "theta":
            return self._eval(theta_deg)
        return self._eval(c_from_theta_deg(theta_deg))

    def at_c(self, c):
        if self.domain == "c":
            return self._eval(c)
        return self._eval(theta_deg_from_c(c))

    def negated(self) -> "TableCriterion":
        flipped = TableCriterion(self.nodes, self.values, self.domain, -self.sign)
        return flipped


@dataclass
class CriterionTable:
    """A solved critical-value curve on a fixed lattice.

    ``nodes`` holds theta in degrees for the psi91 lattice and c for c101.
    ``residuals`` are the per-node defects Pr - (1 - alpha) at the stopping
    state of the solver (identically 0 at the pinned endpoints).
    """

    family: str  # "ideal" or "fisher-behrens"
    design: Design
    alpha: float
    lattice_kind: str  # "psi91" or "c101"
    nodes: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    converged: bool
    tolerance: float
    sweeps: int = 0

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)
        n = {"psi91": PSI_SIZE, "c101": C101_SIZE}.get(self.lattice_kind)
        if n is None:
            raise ValueError(f"unknown lattice kind {self.lattice_kind!r}")
        for name, arr in (("nodes", self.nodes), ("values", self.values), ("residuals", self.residuals)):
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")

    def criterion(self) -> TableCriterion:
        domain = "theta" if self.lattice_kind == "psi91" else "c"
        return TableCriterion(self.nodes, self.values, domain)

    def value_at_theta(self, theta_deg):
        return self.criterion().at_theta(theta_deg)

    def value_at_c(self, c):
        return self.criterion().at_c(c)

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))

    def with_values(self, values, residuals=None) -> "CriterionTable":
        new = replace(self)
        new.values = np.asarray(values, dtype=float).copy()
        if residuals is not None:
            new.residuals = np.asarray(residuals, dtype=float).copy()
        return new
