"""Error measurement, convergence fitting and trajectory bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .integrators import Trajectory
from .models import MechModel, energy


@dataclass(frozen=True)
class ConvergenceReport:
    """Log-log fit of errors against step sizes.

    ``h_values`` are strictly decreasing; ``slope``/``intercept`` come from
    an ordinary least-squares fit of ``log error`` against ``log h``.  When a
    measured error is zero or negative the fit is meaningless and the report
    is marked ``degenerate`` with NaN fit parameters instead.
    """

    h_values: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        h = np.asarray(self.h_values, dtype=float)
        e = np.asarray(self.errors, dtype=float)
        if h.shape != e.shape or h.ndim != 1 or h.shape[0] < 3:
            raise ValueError("need matching 1-D arrays of at least 3 step sizes")
        if not np.all(h > 0) or not np.all(np.diff(h) < 0):
            raise ValueError("h_values must be positive and strictly decreasing")
        object.__setattr__(self, "h_values", h)
        object.__setattr__(self, "errors", e)


def fit_slope(
    h_values: Sequence[float], errors: Sequence[float]
) -> ConvergenceReport:
    """Fit the observed convergence order from (h, error) pairs."""
    h = np.asarray(h_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.shape != e.shape or h.ndim != 1:
        raise ValueError("h_values and errors must be 1-D arrays of equal length")
    order = np.argsort(h)[::-1]
    h, e = h[order], e[order]
    if np.any(e <= 0):
        return ConvergenceReport(h, e, math.nan, math.nan, degenerate=True)
    slope, intercept = np.polyfit(np.log(h), np.log(e), 1)
    return ConvergenceReport(h, e, float(slope), float(intercept))


def _quantity(traj: Trajectory, name: str) -> np.ndarray:
    if name == "x":
        return traj.x
    if name == "p":
        return traj.p
    if name == "energy":
        return traj.energy[:, None]
    raise ValueError(f"unknown quantity {name!r} (expected x, p or energy)")


def _aligned_reference(traj: Trajectory, reference: Trajectory, name: str):
    if not math.isclose(traj.grid.t0, reference.grid.t0, abs_tol=1e-12):
        raise ValueError("trajectory and reference grids start at different times")
    ratio = traj.grid.h / reference.grid.h
    stride = round(ratio)
    if stride < 1 or abs(stride - ratio) > 1e-9:
        raise ValueError(
            f"coarse step {traj.grid.h} is not an integer multiple of "
            f"reference step {reference.grid.h}"
        )
    if traj.grid.n_steps * stride > reference.grid.n_steps:
        raise ValueError("reference grid does not cover the trajectory horizon")
    values = _quantity(reference, name)
    return values[: traj.grid.n_steps * stride + 1 : stride]


def global_error(
    traj: Trajectory,
    reference: Trajectory | Callable[[np.ndarray], np.ndarray],
    quantity: str = "x",
) -> float:
    """Worst-node infinity-norm error of a trajectory against a reference.

    The reference is either a callable mapping the grid times to exact
    values, or another trajectory on a grid that refines this one (same
    start, coarse step an integer multiple of the fine step); the reference
    is then subsampled at the coincident nodes.
    """
    values = _quantity(traj, quantity)
    if isinstance(reference, Trajectory):
        ref = _aligned_reference(traj, reference, quantity)
    else:
        ref = np.asarray(reference(traj.times), dtype=float)
        ref = ref.reshape(values.shape)
    return float(np.max(np.abs(values - ref)))


def energy_series(model: MechModel, traj: Trajectory) -> np.ndarray:
    """Mechanical energy at every node of a run."""
    return np.array(
        [energy(model, traj.x[k], traj.p[k]) for k in range(traj.x.shape[0])]
    )


def compare(a: Trajectory, b: Trajectory) -> float:
    """Max pointwise position difference between runs on the same grid."""
    if a.grid.n_steps != b.grid.n_steps or not math.isclose(a.grid.h, b.grid.h):
        raise ValueError("trajectories live on different grids")
    return float(np.max(np.abs(a.x - b.x)))


def reverse(traj: Trajectory) -> Trajectory:
    """Flip a run in time; applying it twice restores the original."""
    return replace(
        traj,
        x=traj.x[::-1].copy(),
        p=traj.p[::-1].copy(),
        energy=traj.energy[::-1].copy(),
        newton_iters=traj.newton_iters[::-1].copy(),
        time_reversed=not traj.time_reversed,
        p_alpha=None if traj.p_alpha is None else traj.p_alpha[::-1].copy(),
    )


def convergence_summary(report: ConvergenceReport) -> str:
    """Human-readable digest of a convergence study."""
    lines = ["h            error"]
    for h, e in zip(report.h_values, report.errors):
        lines.append(f"{h:<12.6g} {e:.6e}")
    if report.degenerate:
        lines.append("fit degenerate: at least one error is not positive")
    else:
        lines.append(f"fitted slope {report.slope:.4f} (intercept {report.intercept:.4f})")
    return "\n".join(lines)


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    """Write a report as CSV rows ``h,error,fitted_slope``."""
    rows = ["h,error,fitted_slope"]
    for h, e in zip(report.h_values, report.errors):
        rows.append(f"{h:.17g},{e:.17g},{report.slope:.17g}")
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(rows) + "\n")
