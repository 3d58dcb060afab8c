"""Render trajectory and convergence figures to image files."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import ConvergenceReport
from .integrators import Trajectory


def save_trajectory_figure(
    trajectories: Sequence[Trajectory],
    labels: Sequence[str],
    path,
    title: str | None = None,
) -> None:
    """Plot position and energy against time and write the figure to `path`."""
    fig, (ax_x, ax_e) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    for traj, label in zip(trajectories, labels):
        t = traj.times
        ax_x.plot(t, traj.x[:, 0], label=label)
        ax_e.plot(t, traj.energy, label=label)
    ax_x.set_ylabel("x")
    ax_e.set_ylabel("energy")
    ax_e.set_xlabel("t")
    for ax in (ax_x, ax_e):
        ax.grid(True, alpha=0.4)
        ax.legend(loc="best", fontsize="small")
    if title:
        ax_x.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(report: ConvergenceReport, path, title=None) -> None:
    """Log-log error plot with the fitted power law overlaid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(report.h_values, report.errors, "o", label="measured")
    if not report.degenerate:
        fit = np.exp(report.intercept) * report.h_values**report.slope
        ax.loglog(report.h_values, fit, "--", label=f"slope {report.slope:.3f}")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
