"""Deflection angles and thin-lens observables of the particle sink."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from scipy import integrate, optimize

from .errors import CapturedOrbitError, ConvergenceError, DomainError, NoLensingSolutionError
from .geodesic import turning_point


class SeriesAccuracyWarning(UserWarning):
    """The weak-field series is used where ``|b| < 10 c0``."""


class SmallAngleWarning(UserWarning):
    """A thin-lens angle is too large for the small-angle relations."""


def _require_deflected(c0, b, strict=True):
    if b == 0:
        raise DomainError("impact parameter b must be nonzero")
    if c0 < 0:
        raise DomainError(f"c0 must be non-negative, got {c0!r}")
    bm = 2.0 * c0
    if abs(b) < bm or (strict and abs(b) == bm):
        raise CapturedOrbitError(f"|b|={abs(b)!r} is not above 2 c0={bm!r}; the phonon is not deflected to infinity")


def deflection_series(c0: float, b: float) -> float:
    """Weak-field deflection ``sign(b) 3 pi c0^2 / (4 b^2)``.

    The critical value ``|b| = 2 c0`` is accepted since the series is only
    an estimate there; smaller ``|b|`` is rejected.
    """
    _require_deflected(c0, b, strict=False)
    if abs(b) < 10.0 * c0:
        warnings.warn(f"series deflection at |b|/c0={abs(b) / c0:.3g} < 10 is inaccurate", SeriesAccuracyWarning, stacklevel=2)
    return math.copysign(0.75 * math.pi * c0 * c0 / (b * b), b)


def _swept_integrand(c0, ab, u_t):
    c2b2 = (c0 * ab) ** 2
    inv_ut2 = 1.0 / (u_t * u_t)

    def g(s):
        # u = u_t - s^2 removes the 1/sqrt(u_t - u) endpoint singularity
        u = u_t - s * s
        return 2.0 * ab / math.sqrt((2.0 * u_t - s * s) * (inv_ut2 - c2b2 * u * u))

    return g


def deflection_exact(c0: float, b: float, quad_tol: float = 1e-12) -> float:
    """Net deflection from the full orbit integral.

    The swept angle ``2 * int_{r_t}^inf |b| dr / sqrt(r^4 + b^2 (c0^2 - r^2))``
    is evaluated in ``u = 1/r``, where the quartic factors as
    ``(u_t^2 - u^2)(1/u_t^2 - b^2 c0^2 u^2)``, and then in ``s`` with
    ``u = u_t - s^2``; the resulting integrand on ``[0, sqrt(u_t)]`` is
    smooth and handed to adaptive Gauss-Kronrod quadrature.  Returns
    ``sign(b) * (swept - pi)``.
    """
    _require_deflected(c0, b)
    ab = abs(b)
    u_t = 1.0 / turning_point(c0, ab) if c0 > 0 else 1.0 / ab
    g = _swept_integrand(c0, ab, u_t)
    res = integrate.quad(g, 0.0, math.sqrt(u_t), epsabs=0.5 * quad_tol, epsrel=0.0, limit=200, full_output=1)
    half, abserr = res[0], res[1]
    if len(res) > 3 or not abserr <= 0.5 * quad_tol:
        reason = res[3].split("\n")[0].strip() if len(res) > 3 else "error estimate above tolerance"
        raise ConvergenceError(
            f"quadrature for c0={c0!r}, b={b!r} missed quad_tol={quad_tol:.3g}: {reason}",
            error_estimate=2.0 * abserr,
        )
    return math.copysign(2.0 * half - math.pi, b)


def focal_length(c0: float, b: float) -> float:
    """Distance ``2 |b|^3 / (3 pi c0^2)`` at which the sink focuses a beam at offset ``b``.

    Two parallel beams at ``+b`` and ``-b`` cross at twice this distance.
    """
    _require_deflected(c0, b, strict=False)
    if c0 == 0:
        return math.inf
    return 2.0 * abs(b) ** 3 / (3.0 * math.pi * c0 * c0)


def _check_distances(d_L, d_s):
    if not 0 < d_L < d_s:
        raise DomainError(f"need 0 < d_L < d_s, got d_L={d_L!r}, d_s={d_s!r}")
    if not math.isfinite(d_s):
        raise DomainError("d_s must be finite")


def einstein_angle(c0: float, d_L: float, d_s: float) -> float:
    _check_distances(d_L, d_s)
    theta = (3.0 * math.pi * c0 * c0 * (d_s - d_L) / (4.0 * d_s * d_L * d_L)) ** (1.0 / 3.0)
    if theta > 0.1:
        warnings.warn(f"Einstein angle {theta:.3g} rad exceeds the small-angle regime", SmallAngleWarning, stacklevel=2)
    return theta


def max_deflection(c0: float, wavelength: float) -> float:
    """Largest deflection compatible with the eikonal picture, reached at ``b = wavelength``."""
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    return 0.75 * math.pi * (c0 / wavelength) ** 2


@dataclass(frozen=True)
class LensGeometry:
    c0: float
    d_L: float
    d_s: float
    theta_E: float
    theta_s: float
    b_solved: float
    deflection: float
    theta_E_closed_form: float

    @property
    def image_angles(self) -> tuple:
        return (self.theta_E, -self.theta_E)

    @property
    def thin_lens_residual(self) -> float:
        """Largest violation of ``d_L theta_E = (d_s - d_L) theta_s = b``."""
        return max(
            abs(self.d_L * self.theta_E - self.b_solved),
            abs((self.d_s - self.d_L) * self.theta_s - self.b_solved),
        )

    @property
    def angle_sum_residual(self) -> float:
        """``|deflection - (theta_s + theta_E)|``."""
        return abs(self.deflection - (self.theta_s + self.theta_E))

    def to_mapping(self) -> dict:
        return {
            "c0": self.c0,
            "d_L": self.d_L,
            "d_s": self.d_s,
            "theta_E": self.theta_E,
            "theta_s": self.theta_s,
            "b_solved": self.b_solved,
            "image_angles": list(self.image_angles),
            "deflection": self.deflection,
            "theta_E_closed_form": self.theta_E_closed_form,
            "thin_lens_residual": self.thin_lens_residual,
            "angle_sum_residual": self.angle_sum_residual,
        }


def lens_solve(c0: float, d_L: float, d_s: float, quad_tol: float = 1e-12) -> LensGeometry:
    """Solve the thin-lens geometry with the exact deflection.

    With ``theta_E = b/d_L`` and ``theta_s = b/(d_s - d_L)`` the condition
    ``deflection(b) = theta_s + theta_E`` becomes one equation in ``b``.
    The deflection diverges at ``b -> 2 c0`` and decays like ``1/b^2``, so
    the root is bracketed between the critical impact parameter and a
    geometrically grown upper bound.
    """
    _check_distances(d_L, d_s)
    if not c0 >= 0:
        raise DomainError(f"c0 must be non-negative, got {c0!r}")
    if c0 == 0:
        raise NoLensingSolutionError("no sink (c0 = 0): the deflection vanishes and no image forms")
    slope = d_s / (d_L * (d_s - d_L))

    def mismatch(b):
        return deflection_exact(c0, b, quad_tol) - slope * b

    lo = 2.0 * c0 * (1.0 + 1e-9)
    if mismatch(lo) <= 0:
        raise NoLensingSolutionError(
            f"no lensing solution for c0={c0!r}, d_L={d_L!r}, d_s={d_s!r}: geometry demands more bending than the sink supplies"
        )
    hi = max(4.0 * c0, 2.0 * lo)
    while mismatch(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12 * c0:
            raise NoLensingSolutionError("root bracket search diverged")
    b = optimize.brentq(mismatch, lo, hi, xtol=1e-15, maxiter=500)
    theta_E = b / d_L
    theta_s = b / (d_s - d_L)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallAngleWarning)
        closed = einstein_angle(c0, d_L, d_s)
    if theta_E > 0.1:
        warnings.warn(f"solved Einstein angle {theta_E:.3g} rad exceeds the small-angle regime", SmallAngleWarning, stacklevel=2)
    return LensGeometry(
        c0=c0,
        d_L=d_L,
        d_s=d_s,
        theta_E=theta_E,
        theta_s=theta_s,
        b_solved=b,
        deflection=deflection_exact(c0, b, quad_tol),
        theta_E_closed_form=closed,
    )


@dataclass(frozen=True)
class SweepRow:
    b: float
    deflection_exact: float
    deflection_series: float
    abs_error: float
    focal_length: float


def sweep_point(c0: float, b: float, quad_tol: float = 1e-12) -> SweepRow:
    exact = deflection_exact(c0, b, quad_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesAccuracyWarning)
        series = deflection_series(c0, b)
    return SweepRow(b, exact, series, abs(exact - series), focal_length(c0, b))


def _sweep_task(args):
    return sweep_point(*args)


def deflection_sweep(c0: float, bs, quad_tol: float = 1e-12, jobs: int = 1) -> list:
    """Evaluate :func:`sweep_point` over ``bs``; rows come back in input order.

    ``jobs > 1`` spreads points over worker processes, ``jobs=0`` uses one
    per CPU.
    """
    tasks = [(c0, float(b), quad_tol) for b in bs]
    if jobs == 0:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) < 2:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
