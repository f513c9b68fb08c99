"""Adaptive Dormand-Prince 5(4) integrator.

A small explicit embedded pair with first-same-as-last evaluation and
local extrapolation (the 5th-order solution is propagated).  The driver is
a generator so callers decide when to stop and can inspect every accepted
step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

# Butcher tableau, Dormand & Prince (1980)
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def dopri_step(f, t, y, h, k1):
    """One Dormand-Prince step from ``(t, y)`` with ``k1 = f(t, y)``.

    Returns ``(y_new, err, k7)`` where ``err`` is the embedded error
    estimate and ``k7 = f(t + h, y_new)`` can be reused as the next ``k1``.
    """
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(A[i], k))
        k.append(f(t + C[i] * h, yi))
    K = np.array(k)
    y_new = y + h * (B5 @ K)
    err = h * (E @ K)
    return y_new, err, k[6]


@dataclass
class Step:
    t0: float
    y0: np.ndarray
    t1: float
    y1: np.ndarray
    error_norm: float


class StepLimitError(ConvergenceError):
    pass


def integrate(f, t0, y0, h0, rel_tol=1e-10, abs_tol=1e-12, max_steps=10**7, h_limit=None):
    """Yield accepted steps of ``y' = f(t, y)`` starting at ``(t0, y0)``.

    The error norm is the RMS of ``err_i / (abs_tol + rel_tol * max(|y0_i|, |y1_i|))``
    and a step is accepted when it is at most one.  Raises ``StepLimitError``
    after ``max_steps`` attempted steps; the generator never stops on its own.
    ``h_limit(t, y)``, if given, caps the size of the next step.
    """
    t = float(t0)
    y = np.asarray(y0, dtype=float)
    h = float(h0)
    k1 = f(t, y)
    attempts = 0
    while True:
        attempts += 1
        if h_limit is not None:
            h = min(h, h_limit(t, y))
        if attempts > max_steps:
            raise StepLimitError(f"step limit of {max_steps} reached at t={t!r}", error_estimate=None)
        y_new, err, k7 = dopri_step(f, t, y, h, k1)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if not np.isfinite(norm):
            factor = MIN_FACTOR
        elif norm == 0.0:
            factor = MAX_FACTOR
        else:
            factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * norm ** (-1.0 / ORDER)))
        if norm <= 1.0:
            t_new = t + h
            yield Step(t, y, t_new, y_new, norm)
            t, y, k1 = t_new, y_new, k7
            h = h * factor
        else:
            h *= min(factor, 1.0)
            if t + h == t:
                raise ConvergenceError(f"step size underflow at t={t!r}", error_estimate=norm)
