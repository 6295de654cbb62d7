"""Sample-size bookkeeping and the equivalent nuisance / statistic coordinates.

The unknown variance ratio zeta = sigma1^2/sigma2^2 has two bounded
reparameterizations,

    gamma = n2*zeta / (n1 + n2*zeta)      in [0, 1],
    psi   = arctan sqrt(n2*zeta / n1)     in [0, 90] degrees,

with gamma = sin^2 psi independently of the sample sizes.  The statistic
Z = S1^2/S2^2 has the same bounded companions c and theta.  ``VariancePoint``
and ``StatPoint`` carry all coordinates at once, kept mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import INFINITY

__all__ = [
    "Design",
    "StatPoint",
    "VariancePoint",
    "angle_from_z",
    "c_from_theta_deg",
    "theta_deg_from_c",
]


def theta_deg_from_c(c):
    """Angle in degrees with sin^2 theta = c."""
    c_arr = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    out = np.degrees(np.arcsin(np.sqrt(c_arr)))
    return float(out) if np.isscalar(c) else out


def c_from_theta_deg(theta_deg):
    t = np.radians(np.asarray(theta_deg, dtype=float))
    out = np.sin(t) ** 2
    return float(out) if np.isscalar(theta_deg) else out


@dataclass(frozen=True)
class Design:
    """Sample sizes n1, n2 with the derived degrees of freedom.

    n1 may be INFINITY for the limiting criteria.  n2 = INFINITY is allowed
    only together with n1 = INFINITY (the doubly-degenerate normal case);
    a finite-n1 design with infinite n2 is always handled by swapping the
    samples instead.
    """

    n1: float
    n2: float

    def __post_init__(self):
        if self.n1 != INFINITY:
            if self.n1 != int(self.n1) or self.n1 < 2:
                raise ValueError(f"n1 must be an integer >= 2 or INFINITY, got {self.n1!r}")
        if self.n2 == INFINITY:
            if self.n1 != INFINITY:
                raise ValueError("n2 = INFINITY requires n1 = INFINITY; swap the samples")
        elif self.n2 != int(self.n2) or self.n2 < 2:
            raise ValueError(f"n2 must be an integer >= 2, got {self.n2!r}")

    @property
    def nu1(self) -> float:
        return INFINITY if self.n1 == INFINITY else self.n1 - 1

    @property
    def nu2(self) -> float:
        return INFINITY if self.n2 == INFINITY else self.n2 - 1

    @property
    def nu(self) -> float:
        return self.nu1 + self.nu2

    @property
    def is_infinite(self) -> bool:
        return self.n1 == INFINITY

    @property
    def harmonic_zeta(self) -> float:
        """The ratio zeta at which V is exactly Student-t with nu df."""
        if self.is_infinite:
            raise ValueError("harmonic ratio is undefined for an infinite design")
        return self.n1 * self.nu1 / (self.n2 * self.nu2)

    def swapped(self) -> "Design":
        if self.is_infinite:
            raise ValueError("cannot swap an infinite design")
        return Design(int(self.n2), int(self.n1))


def _require_finite_design(d: Design) -> None:
    if d.is_infinite:
        raise ValueError("this coordinate conversion needs finite sample sizes")


@dataclass(frozen=True)
class VariancePoint:
    """One nuisance-parameter value in the three equivalent coordinates."""

    zeta: float
    gamma: float
    psi_deg: float

    @classmethod
    def from_zeta(cls, zeta: float, d: Design) -> "VariancePoint":
        _require_finite_design(d)
        if zeta == INFINITY:
            return cls(INFINITY, 1.0, 90.0)
        if zeta < 0:
            raise ValueError("zeta must be nonnegative")
        gamma = d.n2 * zeta / (d.n1 + d.n2 * zeta)
        return cls(zeta, gamma, theta_deg_from_c(gamma))

    @classmethod
    def from_gamma(cls, gamma: float, d: Design) -> "VariancePoint":
        _require_finite_design(d)
        if not (0.0 <= gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if gamma == 1.0:
            return cls(INFINITY, 1.0, 90.0)
        zeta = d.n1 * gamma / (d.n2 * (1.0 - gamma))
        return cls(zeta, gamma, theta_deg_from_c(gamma))

    @classmethod
    def from_psi_deg(cls, psi_deg: float, d: Design) -> "VariancePoint":
        if not (0.0 <= psi_deg <= 90.0):
            raise ValueError("psi must lie in [0, 90] degrees")
        return cls.from_gamma(c_from_theta_deg(psi_deg), d)


@dataclass(frozen=True)
class StatPoint:
    """A value of the statistic pair (V, Z) with the bounded forms of Z."""

    v: float
    z: float
    c: float
    theta_deg: float

    @classmethod
    def from_z(cls, v: float, z: float, d: Design) -> "StatPoint":
        _require_finite_design(d)
        if z == INFINITY:
            return cls(v, INFINITY, 1.0, 90.0)
        if z < 0:
            raise ValueError("z must be nonnegative")
        c = d.n2 * z / (d.n1 + d.n2 * z)
        return cls(v, z, c, theta_deg_from_c(c))

    @classmethod
    def from_c(cls, v: float, c: float, d: Design) -> "StatPoint":
        _require_finite_design(d)
        if not (0.0 <= c <= 1.0):
            raise ValueError("c must lie in [0, 1]")
        if c == 1.0:
            return cls(v, INFINITY, 1.0, 90.0)
        z = d.n1 * c / (d.n2 * (1.0 - c))
        return cls(v, z, c, theta_deg_from_c(c))

    @classmethod
    def from_theta_deg(cls, v: float, theta_deg: float, d: Design) -> "StatPoint":
        if not (0.0 <= theta_deg <= 90.0):
            raise ValueError("theta must lie in [0, 90] degrees")
        return cls.from_c(v, c_from_theta_deg(theta_deg), d)


def angle_from_z(z, d: Design):
    """Theta in degrees for a (vector of) variance-ratio statistic values."""
    _require_finite_design(d)
    z_arr = np.asarray(z, dtype=float)
    c = d.n2 * z_arr / (d.n1 + d.n2 * z_arr)
    out = np.degrees(np.arcsin(np.sqrt(np.clip(c, 0.0, 1.0))))
    return float(out) if np.isscalar(z) else out
