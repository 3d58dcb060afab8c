"""Reference solutions the integrators are judged against.

Two independent oracles:

* :func:`exact_oscillator` evaluates the closed-form solution of the
  underdamped linear oscillator ``m x'' + rho x' + c x = 0`` (the
  ``alpha = 1/2`` limit of the fractional model), extended to
  piecewise-constant forcing by :func:`exact_oscillator_forced`.
* :func:`matrix_oracle_solve` discretizes the linear fractional equation
  ``m x'' + rho D^beta x + c x = F(t)`` with zero initial data on the whole
  grid at once: triangular-strip Toeplitz operator matrices are assembled
  for the second difference and the order-``beta`` difference, the first two
  rows are replaced by the initial conditions ``x_0 = 0`` and
  ``(x_1 - x_0)/h = 0``, and the dense system is solved by LU with partial
  pivoting.  No time stepping is involved, which makes it a genuinely
  different computation from the integrators it checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fracops import Grid, operator_matrix
from .integrators import Trajectory
from .models import ExternalForce, MechModel, Quadratic, energy, force_at

_IC_RESIDUAL_SCALE = 1e-10


class SingularMatrix(RuntimeError):
    """The assembled oracle system could not be solved."""


@dataclass(frozen=True)
class OscillatorParams:
    """Scalar underdamped oscillator ``m x'' + rho x' + c x = 0``."""

    mass: float = 1.0
    stiffness: float = 1.0
    damping: float = 0.0
    x0: float = 1.0
    p0: float = 0.0

    def __post_init__(self) -> None:
        if not self.mass > 0 or not self.stiffness > 0:
            raise ValueError("mass and stiffness must be positive")
        if self.damping < 0:
            raise ValueError("damping must be nonnegative")
        if not self.damping**2 < 4.0 * self.mass * self.stiffness:
            raise ValueError(
                f"oscillator is not underdamped: rho^2 = {self.damping ** 2} "
                f">= 4 m c = {4.0 * self.mass * self.stiffness}"
            )


def _propagate(params: OscillatorParams, x_s, v_s, tau, offset=0.0):
    """Closed-form damped motion around the rest point ``offset`` after ``tau``."""
    zeta = params.damping / (2.0 * params.mass)
    omega = np.sqrt(params.stiffness / params.mass - zeta**2)
    a = x_s - offset
    b = (v_s + zeta * a) / omega
    decay = np.exp(-zeta * tau)
    cos, sin = np.cos(omega * tau), np.sin(omega * tau)
    x = offset + decay * (a * cos + b * sin)
    v = decay * ((b * omega - zeta * a) * cos - (a * omega + zeta * b) * sin)
    return x, v


def exact_oscillator(params: OscillatorParams, t):
    """Exact ``(x, p)`` of the free underdamped oscillator at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    x, v = _propagate(params, params.x0, params.p0 / params.mass, t)
    p = params.mass * v
    if t.ndim == 0:
        return float(x), float(p)
    return x, p


def exact_oscillator_forced(params: OscillatorParams, force: ExternalForce | None, t):
    """Exact ``(x, p)`` under a piecewise-constant force, by segment matching.

    The motion is propagated across the force breakpoints; on each segment
    the system oscillates around the shifted rest point ``F / c``.  Times are
    measured from 0 and must be nonnegative.
    """
    t = np.asarray(t, dtype=float)
    t_flat = np.atleast_1d(t)
    if np.any(t_flat < 0):
        raise ValueError("forced solution is only defined for t >= 0")
    t_max = float(t_flat.max(initial=0.0))
    cuts = {0.0, t_max}
    if force is not None:
        for t_start, t_end, _ in force.intervals:
            for edge in (t_start, t_end):
                if 0.0 < edge < t_max:
                    cuts.add(float(edge))
    edges = sorted(cuts)

    x_out = np.empty_like(t_flat)
    p_out = np.empty_like(t_flat)
    x_s, v_s = params.x0, params.p0 / params.mass
    for left, right in zip(edges[:-1], edges[1:]):
        offset = force_at(force, 0.5 * (left + right)) / params.stiffness
        inside = (t_flat >= left) & (t_flat <= right)
        if np.any(inside):
            x_out[inside], v = _propagate(params, x_s, v_s, t_flat[inside] - left, offset)
            p_out[inside] = params.mass * v
        x_s, v_s = _propagate(params, x_s, v_s, right - left, offset)
    at_zero = t_flat == 0.0
    x_out[at_zero], p_out[at_zero] = params.x0, params.p0
    if t.ndim == 0:
        return float(x_out[0]), float(p_out[0])
    return x_out, p_out


def exact_trajectory(
    params: OscillatorParams, grid: Grid, force: ExternalForce | None = None
):
    """Sample the closed-form solution on a grid as a trajectory record."""
    if force is None:
        x, p = exact_oscillator(params, grid.times)
    else:
        x, p = exact_oscillator_forced(params, force, grid.times)
    energies = 0.5 * p**2 / params.mass + 0.5 * params.stiffness * x**2
    return Trajectory(
        grid=grid,
        x=x[:, None],
        p=p[:, None],
        energy=energies,
        newton_iters=np.zeros(grid.n_steps, dtype=int),
    )


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense LU solve that reports failure as :class:`SingularMatrix`."""
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as err:
        raise SingularMatrix(str(err)) from err


def matrix_oracle_system(model: MechModel, grid: Grid, beta: float, component: int = 0):
    """Assemble ``(A, b)`` for one component of the linear fractional system.

    ``A = m T_2 + rho T_beta + c I`` with the operator matrices carrying
    their own ``h`` powers, then rows 0 and 1 are overwritten with the zero
    initial conditions.
    """
    if not isinstance(model.potential, Quadratic):
        raise ValueError("matrix oracle needs a diagonal quadratic potential")
    if not 0 <= component < model.dim:
        raise ValueError(f"component {component} out of range for dim {model.dim}")
    n = grid.n_steps + 1
    a = (
        model.mass[component] * operator_matrix(2.0, grid)
        + model.damping[component] * operator_matrix(beta, grid)
        + model.potential.c[component] * np.eye(n)
    )
    b = np.array([force_at(model.force, t) for t in grid.times])
    a[0] = 0.0
    a[0, 0] = 1.0
    b[0] = 0.0
    a[1] = 0.0
    a[1, 0] = -1.0 / grid.h
    a[1, 1] = 1.0 / grid.h
    b[1] = 0.0
    return a, b


def matrix_oracle_solve(model: MechModel, grid: Grid, beta: float):
    """All-at-once solution of the zero-initial-data linear fractional model.

    Returns a trajectory whose momenta are the backward differences
    ``p_k = m (x_k - x_{k-1}) / h`` (with ``p_0 = 0``, matching the imposed
    initial velocity row).  The solve is verified against its own system:
    a residual above ``1e-10 * (1 + max |b|)`` raises
    :class:`SingularMatrix`.
    """
    x = np.zeros((grid.n_steps + 1, model.dim))
    for i in range(model.dim):
        a, b = matrix_oracle_system(model, grid, beta, component=i)
        x[:, i] = solve_dense(a, b)
        residual = float(np.max(np.abs(a @ x[:, i] - b)))
        bound = _IC_RESIDUAL_SCALE * (1.0 + float(np.max(np.abs(b))))
        if residual > bound:
            raise SingularMatrix(
                f"ill-conditioned oracle system: residual {residual:.3e} > {bound:.3e}"
            )
    p = np.zeros_like(x)
    p[1:] = model.mass * (x[1:] - x[:-1]) / grid.h
    energies = np.array([energy(model, x[k], p[k]) for k in range(x.shape[0])])
    return Trajectory(
        grid=grid,
        x=x,
        p=p,
        energy=energies,
        newton_iters=np.zeros(grid.n_steps, dtype=int),
    )
