"""Static SVG figures for trajectories and deflection sweeps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids inside the SVG so reruns give the same file
matplotlib.rcParams["svg.hashsalt"] = "acoustic-lens"
_META = {"Date": None, "Creator": None}


def plot_trajectory(traj, path, window=None) -> Path:
    """Cartesian projection of a phonon path with the horizon and photon-sphere circles."""
    cols = traj.arrays()
    c0 = traj.c0
    fig, ax = plt.subplots(figsize=(6, 6))
    ang = np.linspace(0.0, 2.0 * np.pi, 400)
    ax.fill(c0 * np.cos(ang), c0 * np.sin(ang), color="black", label="horizon $r=c_0$")
    rm = np.sqrt(2.0) * c0
    ax.plot(rm * np.cos(ang), rm * np.sin(ang), "--", color="grey", lw=0.8, label=r"$r_m=\sqrt{2}c_0$")
    ax.plot(cols["x"], cols["y"], color="tab:blue", lw=1.2, label=f"b = {traj.impact_parameter:g}")
    if window is None:
        window = max(6.0 * c0, 3.0 * abs(traj.impact_parameter))
    ax.set_xlim(-window, window)
    ax.set_ylim(-window, window)
    ax.set_aspect("equal")
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$y/\xi$")
    ax.set_title(f"{traj.classification}, swept angle {traj.swept_angle:.6f} rad")
    ax.legend(loc="upper right", fontsize=8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_sweep(rows, c0, path) -> Path:
    """Exact and series deflection against impact parameter."""
    b = np.array([r.b for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.loglog(b / c0, [abs(r.deflection_exact) for r in rows], "o-", ms=3, label="exact (quadrature)")
    ax.loglog(b / c0, [abs(r.deflection_series) for r in rows], "--", label=r"series $3\pi c_0^2/4b^2$")
    ax.set_xlabel(r"$b/c_0$")
    ax.set_ylabel("deflection [rad]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path
