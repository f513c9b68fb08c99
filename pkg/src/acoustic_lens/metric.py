"""The particle-sink acoustic metric.

In healing-length units the sink produces the radial inflow ``v = c0 / r``
and phonons see the 2+1 dimensional line element

    ds^2 = -f(r) dtau^2 + dr^2 / f(r) + r^2 dphi^2,   f(r) = 1 - c0^2 / r^2,

with the acoustic horizon at ``r = c0``.  ``tau`` is related to the lab
time ``t`` by ``dtau = dt - c0 dr / (r f(r))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, HorizonCrossingError


def _check_radius(r):
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")


@dataclass(frozen=True)
class AcousticMetric:
    """Acoustic spacetime of a sink with dimensionless strength ``c0``."""

    c0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.c0) and self.c0 > 0):
            raise DomainError(f"c0 must be positive and finite, got {self.c0!r}")

    @property
    def horizon_radius(self) -> float:
        return self.c0

    def warp_factor(self, r: float) -> float:
        return warp_factor(self, r)

    def flow_velocity(self, r: float) -> float:
        return flow_velocity(self, r)

    def kretschmann(self, r: float) -> float:
        return kretschmann(self, r)

    def ricci_scalar(self, r: float) -> float:
        return ricci_scalar(self, r)

    def lab_time_correction(self, r1: float, r2: float) -> float:
        return lab_time_correction(self, r1, r2)


def warp_factor(m: AcousticMetric, r: float) -> float:
    """``1 - c0^2/r^2``; negative inside the horizon."""
    _check_radius(r)
    return 1.0 - (m.c0 / r) ** 2


def flow_velocity(m: AcousticMetric, r: float) -> float:
    """Inward speed of the background flow in units of the sound speed."""
    _check_radius(r)
    return m.c0 / r


def kretschmann(m: AcousticMetric, r: float) -> float:
    """Kretschmann invariant ``44 c0^2 / r^8``, regular at the horizon."""
    _check_radius(r)
    return 44.0 * m.c0**2 / r**8


def ricci_scalar(m: AcousticMetric, r: float) -> float:
    _check_radius(r)
    return 2.0 * m.c0**2 / r**4


def lab_time_correction(m: AcousticMetric, r1: float, r2: float) -> float:
    """Integral of ``c0 / (r f(r)) dr`` from ``r1`` to ``r2``.

    This is the amount by which a lab-time interval exceeds the
    corresponding ``tau`` interval along a radial displacement.  Both
    radii must lie outside the horizon, where the transform is regular.
    """
    c0 = m.c0
    for name, r in (("r1", r1), ("r2", r2)):
        _check_radius(r)
        if r <= c0:
            raise HorizonCrossingError(
                f"{name}={r!r} is not outside the horizon r_h={c0!r}; the tau-t transform is singular there"
            )
    # (c0/2) ln((r2^2 - c0^2)/(r1^2 - c0^2)), written to avoid cancellation for r >> c0
    num = math.log1p(-((c0 / r2) ** 2)) + 2.0 * math.log(r2)
    den = math.log1p(-((c0 / r1) ** 2)) + 2.0 * math.log(r1)
    return 0.5 * c0 * (num - den)
