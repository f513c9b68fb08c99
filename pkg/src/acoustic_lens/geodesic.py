"""Phonon null geodesics around the particle sink.

With the affine parameter ``lam`` and conserved energy ``E`` and angular
momentum ``L`` the radial motion obeys

    (dr/dlam)^2 / 2 + V(r) = E^2 / 2,   V(r) = L^2/(2 r^2) - c0^2 L^2/(2 r^4),

so orbits are classified by the impact parameter ``b = L/E`` against the
barrier top at ``r_m = sqrt(2) c0``, which is reached exactly when
``|b| = 2 c0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rk
from .errors import CapturedOrbitError, ConvergenceError, DomainError, NoPeakError
from .metric import AcousticMetric


class Classification(str, enum.Enum):
    DEFLECTED = "Deflected"
    CAPTURED = "Captured"
    CRITICAL = "Critical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ConservedCharges:
    energy: float = 1.0
    angular_momentum: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.energy) and self.energy > 0):
            raise DomainError(f"energy must be positive, got {self.energy!r}")
        if not math.isfinite(self.angular_momentum):
            raise DomainError(f"angular momentum must be finite, got {self.angular_momentum!r}")

    @classmethod
    def from_impact_parameter(cls, b: float, energy: float = 1.0) -> "ConservedCharges":
        return cls(energy=energy, angular_momentum=b * energy)

    @property
    def impact_parameter(self) -> float:
        return self.angular_momentum / self.energy


@dataclass(frozen=True)
class PhononState:
    lam: float
    r: float
    phi: float
    r_rate: float
    phi_rate: float
    tau: Optional[float] = None

    @property
    def x(self) -> float:
        return self.r * math.cos(self.phi)

    @property
    def y(self) -> float:
        return self.r * math.sin(self.phi)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and radii for :func:`trace`.

    Radii left as ``None`` are filled in per orbit by :meth:`resolve`:
    launch at ``max(100 c0, 20 |b|)``, escape at the launch radius and
    capture at ``0.1 c0``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10_000_000
    r_start: Optional[float] = None
    r_escape: Optional[float] = None
    r_capture: Optional[float] = None

    def resolve(self, c0: float, b: float) -> "IntegratorConfig":
        r_start = self.r_start if self.r_start is not None else max(100.0 * c0, 20.0 * abs(b))
        r_escape = self.r_escape if self.r_escape is not None else r_start
        r_capture = self.r_capture if self.r_capture is not None else 0.1 * c0
        cfg = replace(self, r_start=r_start, r_escape=r_escape, r_capture=r_capture)
        cfg.validate()
        return cfg

    def validate(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")
        if int(self.max_steps) < 1:
            raise DomainError("max_steps must be at least 1")
        if self.r_capture is not None and self.r_escape is not None:
            if not 0 < self.r_capture < self.r_escape:
                raise DomainError(
                    f"need 0 < r_capture < r_escape, got r_capture={self.r_capture!r}, r_escape={self.r_escape!r}"
                )


@dataclass(frozen=True)
class Trajectory:
    """An integrated phonon path.

    ``swept_angle`` is the total polar angle swept between the asymptotic
    incoming direction and the asymptotic outgoing one (only the incoming
    leg for captured orbits): the integrated ``|phi_end - phi_start|`` plus
    the analytic far-field tails beyond the launch and exit radii, which are
    kept separately in ``far_field_correction``.
    """

    samples: tuple
    charges: ConservedCharges
    c0: float
    classification: Classification
    outcome: str  # "escaped" or "captured"
    raw_swept_angle: float
    far_field_correction: float
    tail_truncation_estimate: float
    conservation_residual_max: float
    angular_momentum_residual_max: float
    config: IntegratorConfig
    periapsis: Optional[PhononState] = None

    @property
    def swept_angle(self) -> float:
        return self.raw_swept_angle + self.far_field_correction

    @property
    def impact_parameter(self) -> float:
        return self.charges.impact_parameter

    @property
    def min_radius(self) -> float:
        return min(s.r for s in self.samples)

    def arrays(self) -> dict:
        """Column arrays ``lambda, r, phi, x, y, dr_dlambda`` (plus ``tau`` when traced)."""
        cols = {
            "lambda": np.array([s.lam for s in self.samples]),
            "r": np.array([s.r for s in self.samples]),
            "phi": np.array([s.phi for s in self.samples]),
        }
        cols["x"] = cols["r"] * np.cos(cols["phi"])
        cols["y"] = cols["r"] * np.sin(cols["phi"])
        cols["dr_dlambda"] = np.array([s.r_rate for s in self.samples])
        if self.samples and self.samples[0].tau is not None:
            cols["tau"] = np.array([np.nan if s.tau is None else s.tau for s in self.samples])
        return cols


def _check_radius(r):
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")


def effective_potential(c0: float, L: float, r: float) -> float:
    _check_radius(r)
    return L * L / (2.0 * r * r) - c0 * c0 * L * L / (2.0 * r**4)


def potential_peak(c0: float, L: float) -> tuple:
    """Location and height ``(sqrt(2) c0, L^2/(8 c0^2))`` of the barrier top."""
    if not c0 > 0:
        raise DomainError(f"c0 must be positive, got {c0!r}")
    if L == 0:
        raise NoPeakError("a radial phonon (L = 0) sees no potential barrier")
    return math.sqrt(2.0) * c0, L * L / (8.0 * c0 * c0)


def critical_impact_parameter(c0: float) -> float:
    if not c0 > 0:
        raise DomainError(f"c0 must be positive, got {c0!r}")
    return 2.0 * c0


def classify(c0: float, b: float) -> Classification:
    b_m = critical_impact_parameter(c0)
    if abs(b) > b_m:
        return Classification.DEFLECTED
    if abs(b) < b_m:
        return Classification.CAPTURED
    return Classification.CRITICAL


def turning_point(c0: float, b: float) -> float:
    """Closest approach of a deflected orbit, the outer root of ``E^2 = 2 V(r)``.

    At ``|b| = 2 c0`` this is the unstable circular orbit ``r_m``; use
    :func:`classify` to tell the two apart.
    """
    if classify(c0, b) is Classification.CAPTURED:
        raise CapturedOrbitError(f"|b|={abs(b)!r} < 2 c0={2 * c0!r}: the phonon is captured, no turning point")
    ab = abs(b)
    return ab * math.sqrt(0.5 + math.sqrt(ab * ab - 4.0 * c0 * c0) / (2.0 * ab))


def far_field_tail(c0: float, b: float, r: float) -> tuple:
    """Polar angle swept by the orbit between radius ``r`` and infinity.

    Returns ``(angle, truncation)``: the flat-space term ``asin(b/r)`` plus
    the first correction in ``(c0/b)^2``, and the size of the neglected
    second-order term.  Requires ``r > |b|``.
    """
    ab = abs(b)
    if ab == 0:
        return 0.0, 0.0
    w = ab / r
    if not w < 1:
        raise DomainError(f"far-field tail needs r > |b|, got r={r!r}, b={b!r}")
    kappa = (c0 / ab) ** 2
    t = math.asin(w)
    # integral of w^4 (1 - w^2)^(-3/2) dw with w = sin t
    first = math.tan(t) - 1.5 * t + 0.25 * math.sin(2.0 * t)
    angle = t - 0.5 * kappa * first
    truncation = kappa * kappa * w**9 / 24.0
    return angle, truncation


def _rhs(c0):
    c0sq = c0 * c0

    def f(lam, y):
        r, _, r_rate, phi_rate = y[0], y[1], y[2], y[3]
        return np.array(
            [
                r_rate,
                phi_rate,
                r * phi_rate * phi_rate - 2.0 * c0sq * phi_rate * phi_rate / r,
                -2.0 * r_rate * phi_rate / r,
            ]
        )

    return f


def _rhs_tau(c0, energy):
    base = _rhs(c0)
    c0sq = c0 * c0

    def f(lam, y):
        r = y[0]
        return np.append(base(lam, y[:4]), energy * r * r / (r * r - c0sq))

    return f


def _state(lam, y, with_tau):
    return PhononState(
        lam=lam,
        r=float(y[0]),
        phi=float(y[1]),
        r_rate=float(y[2]),
        phi_rate=float(y[3]),
        tau=float(y[4]) if with_tau else None,
    )


def _refine_periapsis(f, step: rk.Step, with_tau):
    """Locate dr/dlam = 0 inside an accepted step by Newton iteration on a sub-step."""
    t0, y0 = step.t0, step.y0
    h_hi = step.t1 - t0
    h_lo = 0.0
    k1 = f(t0, y0)
    g0, g1 = y0[2], step.y1[2]
    h = h_hi * (-g0) / (g1 - g0) if g1 != g0 else 0.5 * h_hi
    y = step.y1
    for _ in range(60):
        y, _, k = rk.dopri_step(f, t0, y0, h, k1)
        g, dg = y[2], k[2]
        if g < 0:
            h_lo = h
        else:
            h_hi = h
        h_new = h - g / dg if dg != 0 else 0.5 * (h_lo + h_hi)
        if not h_lo < h_new < h_hi:
            h_new = 0.5 * (h_lo + h_hi)
        if abs(h_new - h) <= 4 * np.finfo(float).eps * max(abs(t0), abs(h)):
            h = h_new
            break
        h = h_new
    y, _, _ = rk.dopri_step(f, t0, y0, h, k1)
    return _state(t0 + h, y, with_tau)


def _step_cap(lam, y):
    # never let an inbound step cover more than half the distance to the sink
    return 0.5 * y[0] / -y[2] if y[2] < 0 else math.inf


def trace(m: AcousticMetric, charges: ConservedCharges, cfg: Optional[IntegratorConfig] = None, with_tau=False) -> Trajectory:
    """Integrate a phonon launched inbound from ``phi = 0`` at the configured start radius.

    Integration stops once the phonon is outbound beyond ``r_escape`` or
    falls below ``r_capture``.  With ``with_tau`` the metric time ``tau`` is
    integrated as well; it is singular at the horizon, so in that case a
    captured phonon is stopped at ``1.01 r_h`` at the latest.
    """
    c0 = m.c0
    b = charges.impact_parameter
    E = charges.energy
    L = charges.angular_momentum
    cfg = (cfg or IntegratorConfig()).resolve(c0, b)
    r0 = cfg.r_start
    if not r0 > m.horizon_radius:
        raise DomainError(f"r_start={r0!r} must lie outside the horizon r_h={c0!r}")
    radial_sq = E * E - 2.0 * effective_potential(c0, L, r0)
    if radial_sq < 0:
        raise DomainError(f"r_start={r0!r} lies inside the potential barrier for b={b!r}; launch further out")
    r_capture = cfg.r_capture
    if with_tau:
        r_capture = max(r_capture, 1.01 * c0)

    y0 = [r0, 0.0, -math.sqrt(radial_sq), L / (r0 * r0)]
    f = _rhs(c0)
    if with_tau:
        y0.append(0.0)
        f = _rhs_tau(c0, E)
    y0 = np.array(y0)

    samples = [_state(0.0, y0, with_tau)]
    periapsis = None
    outcome = None
    h0 = 1e-3 * r0 / E
    try:
        for step in rk.integrate(f, 0.0, y0, h0, cfg.rel_tol, cfg.abs_tol, int(cfg.max_steps), _step_cap):
            if step.y0[2] < 0 <= step.y1[2] and step.y1[0] >= r_capture:
                periapsis = _refine_periapsis(f, step, with_tau)
                if step.t0 < periapsis.lam < step.t1:
                    samples.append(periapsis)
            samples.append(_state(step.t1, step.y1, with_tau))
            r, r_rate = step.y1[0], step.y1[2]
            if r < r_capture:
                outcome = "captured"
                break
            if r_rate > 0 and r >= cfg.r_escape:
                outcome = "escaped"
                break
    except ConvergenceError as exc:
        partial = _assemble(samples, charges, c0, cfg, outcome or "incomplete", periapsis)
        raise ConvergenceError(str(exc), error_estimate=exc.error_estimate, partial=partial) from exc
    return _assemble(samples, charges, c0, cfg, outcome, periapsis)


def _assemble(samples, charges, c0, cfg, outcome, periapsis):
    b = charges.impact_parameter
    E = charges.energy
    L = charges.angular_momentum
    first, last = samples[0], samples[-1]
    raw = abs(last.phi - first.phi)
    tail_in, trunc_in = far_field_tail(c0, b, first.r)
    correction, truncation = tail_in, trunc_in
    if outcome == "escaped":
        tail_out, trunc_out = far_field_tail(c0, b, last.r)
        correction += tail_out
        truncation += trunc_out

    null_res = 0.0
    ang_res = 0.0
    L_scale = abs(L) if L != 0 else 1.0
    for s in samples:
        # outside the horizon V >= 0 and the scale is E^2; inside, dr/dlam dominates
        scale = max(E * E, s.r_rate * s.r_rate)
        null_res = max(null_res, abs(s.r_rate**2 + 2.0 * effective_potential(c0, L, s.r) - E * E) / scale)
        ang_res = max(ang_res, abs(s.r * s.r * s.phi_rate - L) / L_scale)
    return Trajectory(
        samples=tuple(samples),
        charges=charges,
        c0=c0,
        classification=classify(c0, b),
        outcome=outcome,
        raw_swept_angle=raw,
        far_field_correction=correction,
        tail_truncation_estimate=truncation,
        conservation_residual_max=null_res,
        angular_momentum_residual_max=ang_res,
        config=cfg,
        periapsis=periapsis,
    )


def swept_angle_residual(t: Trajectory, quad_tol: float = 1e-12) -> float:
    """``|swept_angle - (pi + |deflection|)|`` against the quadrature deflection."""
    from .lensing import deflection_exact

    if t.classification is not Classification.DEFLECTED:
        raise DomainError(f"swept-angle residual needs a Deflected trajectory, got {t.classification}")
    return abs(t.swept_angle - (math.pi + abs(deflection_exact(t.c0, t.impact_parameter, quad_tol))))
