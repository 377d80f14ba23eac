"""Figure rendering for the CLI report paths.

Uses the non-interactive matplotlib backend and only writes files; nothing
here opens a window.  Each function returns the path it wrote.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_rabi_fit(fit_points, fit, path: str) -> str:
    """Measured ratios vs pulse duration with the fitted sinusoid overlaid."""
    taus = np.array([t for t, _ in fit_points])
    ratios = np.array([r for _, r in fit_points])
    grid = np.linspace(0.0, float(taus.max()) * 1.02, 400)
    model = fit.contrast * np.sin(fit.tau0 + fit.gamma * grid + fit.delta * grid * grid)

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(grid, model, color="tab:blue", lw=1.2, label="fit")
    ax.plot(taus, ratios, ".", color="tab:red", ms=5, alpha=0.7, label="shots")
    ax.set_xlabel("pulse duration (ms)")
    ax.set_ylabel("2 S_n / N")
    ax.set_ylim(-1.05, 1.05)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(
        f"contrast {fit.contrast:.4f}, gamma {fit.gamma:.3f}/ms, delta {fit.delta:.4f}/ms^2"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_witness_curve(curve, path: str, operating_point=None) -> str:
    """Witness vs analysis angle; negative values flag Bell correlations."""
    thetas = np.degrees([t for t, _ in curve])
    values = np.array([w for _, w in curve])

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.axhline(0.0, color="0.5", lw=0.8)
    ax.plot(thetas, values, color="tab:blue", lw=1.4)
    if operating_point is not None:
        theta_op, w_op = operating_point
        ax.plot([math.degrees(theta_op)], [w_op], "o", color="tab:red", ms=6)
    ax.set_xlabel("analysis angle (deg)")
    ax.set_ylabel("witness")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_husimi(thetas, phis, q_field, path: str) -> str:
    """Husimi-Q field on the (azimuth, polar) rectangle."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    mesh = ax.pcolormesh(
        np.degrees(phis), np.degrees(thetas), np.asarray(q_field),
        shading="auto", cmap="viridis",
    )
    fig.colorbar(mesh, ax=ax, label="Q")
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("polar angle (deg)")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_producibility(curves: dict, path: str, point=None) -> str:
    """Entanglement-depth limit curves in the (contrast, zeta_sq) plane.

    curves maps a depth label k to its (contrast, zeta_sq_limit) pairs;
    point, if given, is ((c_b, c_b_err), (zeta_sq, zeta_sq_err)).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    grid = np.linspace(0.0, 0.9999, 400)
    bell = 0.5 * (1.0 - np.sqrt(1.0 - grid * grid))
    ax.plot(grid, bell, color="black", lw=1.4, label="Bell-correlated below")
    for k in sorted(curves):
        pairs = curves[k]
        ax.plot([c for c, _ in pairs], [z for _, z in pairs], lw=1.0, label=f"k = {k}")
    if point is not None:
        (cb, cb_err), (zeta, zeta_err) = point
        ax.errorbar([cb], [zeta], xerr=[cb_err], yerr=[zeta_err],
                    fmt="o", color="tab:red", ms=5, capsize=3)
    ax.set_xlabel("contrast")
    ax.set_ylabel("zeta_sq")
    ax.set_yscale("log")
    ax.set_xlim(0.0, 1.0)
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
