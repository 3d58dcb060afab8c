"""Time steppers for mechanical systems with fractional damping.

The central scheme (``fvi_run``) discretizes

.. math::

    m \\ddot x + \\nabla U(x) + \\rho \\, D^{2\\alpha} x = F(t)

with the discrete Lagrangian

.. math::

    L_d(z_k, z_{k+1}) = \\frac{1}{2h} (z_{k+1} - z_k) \\cdot m (z_{k+1} - z_k)
        - h \\, U(\\kappa z_k + (1 - \\kappa) z_{k+1})

and the retarded Grunwald-Letnikov memory term.  Written per unit step, the
update solved for ``x_{k+1}`` at each interior node is

.. math::

    m \\frac{x_{k+1} - 2 x_k + x_{k-1}}{h^2}
    + \\kappa \\nabla U(\\kappa x_k + (1-\\kappa) x_{k+1})
    + (1 - \\kappa) \\nabla U(\\kappa x_{k-1} + (1-\\kappa) x_k)
    + \\rho \\, (\\Delta_-^\\alpha \\Delta_-^\\alpha x)_k = F(t_k).

The memory sum only reaches back in time, so the step producing ``x_{k+1}``
never looks past index ``k``.  All runs start from ``(x_0, p_0)``; the first
position ``x_1`` comes from the discrete Legendre condition
``p_0 = m (x_1 - x_0)/h + h \\kappa \\nabla U(\\kappa x_0 + (1-\\kappa) x_1)``.

Momenta along a Lagrangian run are reconstructed from the same Legendre
relations: ``p_k = m (x_{k+1} - x_k)/h + h \\kappa \\nabla U`` at interior
nodes and the adjoint expression at the final node.

Companion schemes kept deliberately close in structure:

* ``lda_run`` replaces the memory sum with the one-step force
  ``rho * (x_k - x_{k-1}) / h``; for ``alpha = 1/2`` the memory sum
  telescopes to exactly this expression, so the two integrators coincide.
* ``vi_run`` drops damping entirely (the conservative scheme).
* ``ham_fvi_run`` is the momentum-matching form: explicit updates for
  ``(x, p)`` plus a fractional momentum sequence, equivalent to the
  ``kappa = 0`` Lagrangian scheme.
* ``euler_explicit_run`` / ``euler_implicit_run`` integrate the classical
  linear-damping system ``dx/dt = p/m``, ``dp/dt = -grad U - rho p/m + F``,
  which is what the fractional equation reduces to at ``alpha = 1/2``.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np

from .fracops import (
    Grid,
    GrunwaldTable,
    delta_minus,
    delta_minus_squared,
    delta_plus_squared,
    grunwald_coeffs,
)
from .models import CallablePotential, MechModel, energy, force_at


class FractionalOrderWarning(UserWarning):
    """Raised for orders above 1/2, where damping loses its mechanical reading."""


class NewtonDiverged(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, residual_norm: float, step: int | None = None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    """Run parameters shared by every stepper.

    ``alpha`` is the half-order of the damping term (the equation carries
    ``D^{2 alpha}``), ``kappa`` the quadrature weight of the discrete
    Lagrangian.  ``x0``/``p0`` are broadcast to 1-D state arrays.
    """

    h: float
    n_steps: int
    x0: np.ndarray
    p0: np.ndarray
    alpha: float = 0.5
    kappa: float = 0.5
    t0: float = 0.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self) -> None:
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float)).copy()
        p0 = np.atleast_1d(np.asarray(self.p0, dtype=float)).copy()
        if x0.ndim != 1 or p0.shape != x0.shape:
            raise ValueError("x0 and p0 must be 1-D arrays of equal length")
        if not self.h > 0:
            raise ValueError(f"step must be positive, got h={self.h}")
        if self.n_steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.n_steps}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 0:
            raise ValueError("newton_max_iter must be nonnegative")
        x0.flags.writeable = False
        p0.flags.writeable = False
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "p0", p0)

    @property
    def grid(self) -> Grid:
        return Grid(t0=self.t0, h=self.h, n_steps=self.n_steps)


@dataclass(frozen=True)
class Trajectory:
    """Discrete run: positions, momenta, energies and solver diagnostics.

    ``x`` and ``p`` have shape ``(n_steps + 1, dim)``; ``energy`` holds the
    mechanical energy at each node.  ``newton_iters[k]`` counts the Newton
    iterations spent producing ``x_{k+1}`` (zero for explicit updates).
    ``p_alpha`` carries the fractional momentum sequence of the
    momentum-matching scheme when one was computed.
    """

    grid: Grid
    x: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    newton_iters: np.ndarray
    time_reversed: bool = False
    p_alpha: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.grid.n_steps
        if self.x.shape[0] != n + 1 or self.p.shape != self.x.shape:
            raise ValueError("x and p must hold n_steps + 1 states")
        if self.energy.shape != (n + 1,) or self.newton_iters.shape != (n,):
            raise ValueError("diagnostic arrays do not match the grid")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dim(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class HamiltonianState:
    """One node of the momentum-matching scheme: ``(x, p)`` plus the
    fractional momentum ``p_alpha = -h rho Delta_-^alpha x`` of its history."""

    x: np.ndarray
    p: np.ndarray
    p_alpha: np.ndarray


def _warn_deep_order(alpha: float) -> None:
    if alpha > 0.5 and os.environ.get("FRACVI_WARN", "1") != "0":
        warnings.warn(
            f"alpha={alpha} exceeds 1/2: the scheme still solves the order-2*alpha "
            "equation, but the damped-mechanics reading needs alpha <= 1/2",
            FractionalOrderWarning,
            stacklevel=3,
        )


def _hessian_fn(potential):
    hess = getattr(potential, "hessian", None)
    if hess is None:
        return None
    if isinstance(potential, CallablePotential) and potential.hessian_fn is None:
        return None
    return hess


def _fd_jacobian(residual, x, r0):
    n = x.shape[0]
    jac = np.empty((n, n))
    for j in range(n):
        step = 1e-7 * (1.0 + abs(x[j]))
        bumped = x.copy()
        bumped[j] += step
        jac[:, j] = (np.atleast_1d(residual(bumped)) - r0) / step
    return jac


def newton_solve(residual, guess, jacobian=None, tol=1e-12, max_iter=50):
    """Newton iteration with infinity-norm stopping rule.

    ``residual`` maps a state array to a residual array of the same shape;
    ``jacobian`` is optional (forward differences otherwise).  Returns the
    pair ``(x, iterations)`` where the residual at ``x`` satisfies
    ``max |r| <= tol``.  Raises :class:`NewtonDiverged` after ``max_iter``
    updates without convergence or on a singular Jacobian.
    """
    x = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    r = np.atleast_1d(np.asarray(residual(x), dtype=float))
    norm = float(np.max(np.abs(r)))
    for iteration in range(max_iter + 1):
        if norm <= tol:
            return x, iteration
        if iteration == max_iter:
            break
        jac = jacobian(x) if jacobian is not None else _fd_jacobian(residual, x, r)
        try:
            dx = np.linalg.solve(np.atleast_2d(jac), -r)
        except np.linalg.LinAlgError as err:
            raise NewtonDiverged(
                f"singular Jacobian at iteration {iteration}", norm
            ) from err
        x = x + dx
        r = np.atleast_1d(np.asarray(residual(x), dtype=float))
        norm = float(np.max(np.abs(r)))
    raise NewtonDiverged(
        f"no convergence after {max_iter} iterations (residual {norm:.3e})", norm
    )


def _check_model_config(model: MechModel, config: IntegratorConfig) -> None:
    if config.x0.shape != (model.dim,):
        raise ValueError(
            f"initial data of dim {config.x0.shape[0]} does not match model dim {model.dim}"
        )


def _init_solve(model: MechModel, config: IntegratorConfig):
    m, h, kap = model.mass, config.h, config.kappa
    grad = model.potential.gradient
    x0, p0 = config.x0, config.p0

    def residual(u):
        return m * (u - x0) / h + h * kap * grad(kap * x0 + (1.0 - kap) * u) - p0

    hess = _hessian_fn(model.potential)
    jacobian = None
    if hess is not None:
        mass_term = np.diag(m) / h

        def jacobian(u):
            return mass_term + h * kap * (1.0 - kap) * hess(kap * x0 + (1.0 - kap) * u)

    guess = x0 + h * p0 / m
    try:
        return newton_solve(
            residual, guess, jacobian, config.newton_tol, config.newton_max_iter
        )
    except NewtonDiverged as err:
        err.step = 0
        raise


def fvi_init(model: MechModel, config: IntegratorConfig) -> np.ndarray:
    """Solve the discrete Legendre condition for the first position ``x_1``."""
    _check_model_config(model, config)
    x1, _ = _init_solve(model, config)
    return x1


def _reconstruct_momenta(model, config, x):
    m, h, kap = model.mass, config.h, config.kappa
    grad = model.potential.gradient
    p = np.empty_like(x)
    p[:-1] = m * (x[1:] - x[:-1]) / h
    if kap > 0.0:
        for k in range(x.shape[0] - 1):
            p[k] += h * kap * grad(kap * x[k] + (1.0 - kap) * x[k + 1])
    p[-1] = m * (x[-1] - x[-2]) / h
    if kap < 1.0:
        p[-1] -= h * (1.0 - kap) * grad(kap * x[-2] + (1.0 - kap) * x[-1])
    p[0] = config.p0
    return p


def _energies(model, x, p):
    return np.array([energy(model, x[k], p[k]) for k in range(x.shape[0])])


def _lagrangian_run(model, config, memory) -> Trajectory:
    _check_model_config(model, config)
    n, h, kap = config.n_steps, config.h, config.kappa
    m = model.mass
    grad = model.potential.gradient
    hess = _hessian_fn(model.potential)
    times = config.grid.times

    x = np.zeros((n + 1, model.dim))
    iters = np.zeros(n, dtype=int)
    x[0] = config.x0
    x[1], iters[0] = _init_solve(model, config)

    mass_term = np.diag(m) / h**2
    for k in range(1, n):
        drag = memory(k, x) if memory is not None else 0.0
        known = (
            m * (-2.0 * x[k] + x[k - 1]) / h**2
            + (1.0 - kap) * grad(kap * x[k - 1] + (1.0 - kap) * x[k])
            + drag
            - force_at(model.force, times[k])
        )
        xk = x[k]

        def residual(u):
            return m * u / h**2 + kap * grad(kap * xk + (1.0 - kap) * u) + known

        jacobian = None
        if hess is not None:

            def jacobian(u):
                return mass_term + kap * (1.0 - kap) * hess(kap * xk + (1.0 - kap) * u)

        try:
            x[k + 1], iters[k] = newton_solve(
                residual,
                2.0 * x[k] - x[k - 1],
                jacobian,
                config.newton_tol,
                config.newton_max_iter,
            )
        except NewtonDiverged as err:
            err.step = k
            raise

    p = _reconstruct_momenta(model, config, x)
    return Trajectory(
        grid=config.grid, x=x, p=p, energy=_energies(model, x, p), newton_iters=iters
    )


def fvi_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Fractional variational integrator with retarded memory damping."""
    _warn_deep_order(config.alpha)
    if not model.damping.any():
        return _lagrangian_run(model, config, None)
    table = grunwald_coeffs(config.alpha, config.n_steps)

    def memory(k, x):
        return model.damping * delta_minus_squared(x[: k + 1], table, config.h)

    return _lagrangian_run(model, config, memory)


def lda_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Forced variational integrator with the one-step damping force.

    The discrete forcing ``-rho (x_{k+1} - x_k)`` enters the step equation as
    ``rho (x_k - x_{k-1}) / h``, the memoryless counterpart of the fractional
    drag.  Coincides with :func:`fvi_run` at ``alpha = 1/2``.
    """
    if not model.damping.any():
        return _lagrangian_run(model, config, None)

    def memory(k, x):
        return model.damping * (x[k] - x[k - 1]) / config.h

    return _lagrangian_run(model, config, memory)


def vi_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Plain variational integrator: damping ignored, external force kept."""
    return _lagrangian_run(model, config, None)


def euler_explicit_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Explicit Euler on the classical linear-damping first-order system."""
    _check_model_config(model, config)
    n, h, m = config.n_steps, config.h, model.mass
    grad = model.potential.gradient
    times = config.grid.times
    x = np.zeros((n + 1, model.dim))
    p = np.zeros_like(x)
    x[0], p[0] = config.x0, config.p0
    for k in range(n):
        force = force_at(model.force, times[k])
        x[k + 1] = x[k] + h * p[k] / m
        p[k + 1] = p[k] - h * (grad(x[k]) + model.damping * p[k] / m - force)
    return Trajectory(
        grid=config.grid,
        x=x,
        p=p,
        energy=_energies(model, x, p),
        newton_iters=np.zeros(n, dtype=int),
    )


def euler_implicit_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Implicit Euler on the classical linear-damping first-order system."""
    _check_model_config(model, config)
    n, h, m = config.n_steps, config.h, model.mass
    d = model.dim
    rho = model.damping
    grad = model.potential.gradient
    hess = _hessian_fn(model.potential)
    times = config.grid.times
    x = np.zeros((n + 1, d))
    p = np.zeros_like(x)
    iters = np.zeros(n, dtype=int)
    x[0], p[0] = config.x0, config.p0

    eye = np.eye(d)
    for k in range(n):
        force = force_at(model.force, times[k + 1])
        xk, pk = x[k], p[k]

        def residual(u):
            xn, pn = u[:d], u[d:]
            return np.concatenate(
                [
                    xn - xk - h * pn / m,
                    pn - pk + h * (grad(xn) + rho * pn / m - force),
                ]
            )

        jacobian = None
        if hess is not None:

            def jacobian(u):
                return np.block(
                    [
                        [eye, -h * eye / m],
                        [h * hess(u[:d]), eye + h * np.diag(rho / m)],
                    ]
                )

        guess = np.concatenate([xk + h * pk / m, pk])
        try:
            u, iters[k] = newton_solve(
                residual, guess, jacobian, config.newton_tol, config.newton_max_iter
            )
        except NewtonDiverged as err:
            err.step = k
            raise
        x[k + 1], p[k + 1] = u[:d], u[d:]
    return Trajectory(
        grid=config.grid, x=x, p=p, energy=_energies(model, x, p), newton_iters=iters
    )


def ham_fvi_run(model: MechModel, config: IntegratorConfig) -> Trajectory:
    """Momentum-matching fractional integrator (explicit, ``kappa = 0``).

    Alternates the position update ``x_{k+1} = x_k + h p_k / m`` with the
    momentum update driven by the fractional momentum sequence
    ``p_alpha_{k+1} = -h rho Delta_-^alpha x`` evaluated on the history up to
    ``k + 1``.  Any ``kappa`` in the config is ignored; the scheme is the
    ``kappa = 0`` member of the family and its positions match
    ``fvi_run`` with ``kappa = 0``.
    """
    _check_model_config(model, config)
    _warn_deep_order(config.alpha)
    n, h, m = config.n_steps, config.h, model.mass
    rho = model.damping
    grad = model.potential.gradient
    table = grunwald_coeffs(config.alpha, n)
    times = config.grid.times

    x = np.zeros((n + 1, model.dim))
    p = np.zeros_like(x)
    p_alpha = np.zeros_like(x)
    x[0], p[0] = config.x0, config.p0
    p_alpha[0] = -h * rho * delta_minus(x[:1], table, h)
    for k in range(n):
        x[k + 1] = x[k] + h * p[k] / m
        p_alpha[k + 1] = -h * rho * delta_minus(x[: k + 2], table, h)
        p[k + 1] = (
            p[k]
            - h * grad(x[k + 1])
            + delta_minus(p_alpha[: k + 2], table, h)
            + h * force_at(model.force, times[k + 1])
        )
    return Trajectory(
        grid=config.grid,
        x=x,
        p=p,
        energy=_energies(model, x, p),
        newton_iters=np.zeros(n, dtype=int),
        p_alpha=p_alpha,
    )


def hamiltonian_state(traj: Trajectory, k: int) -> HamiltonianState:
    """Package node ``k`` of a momentum-matching run as a state triple."""
    if traj.p_alpha is None:
        raise ValueError("trajectory carries no fractional momentum sequence")
    return HamiltonianState(x=traj.x[k], p=traj.p[k], p_alpha=traj.p_alpha[k])


def reversal_residual(
    model: MechModel, traj: Trajectory, config: IntegratorConfig
) -> float:
    """Worst advanced-stencil residual of the time-reversed positions.

    Reading a fractional run backwards turns the retarded memory into the
    advanced one and reflects the quadrature weight ``kappa -> 1 - kappa``;
    the reversed sequence then satisfies the mirror equations exactly (up to
    solver tolerance).  Returns the max infinity-norm residual over the
    interior nodes.
    """
    n, h, kap = config.n_steps, config.h, config.kappa
    m = model.mass
    grad = model.potential.gradient
    table = grunwald_coeffs(config.alpha, n)
    times = config.grid.times
    y = traj.x[::-1]
    worst = 0.0
    for k in range(1, n):
        drag = model.damping * delta_plus_squared(y[k:], table, h)
        r = (
            m * (y[k + 1] - 2.0 * y[k] + y[k - 1]) / h**2
            + kap * grad((1.0 - kap) * y[k - 1] + kap * y[k])
            + (1.0 - kap) * grad((1.0 - kap) * y[k] + kap * y[k + 1])
            + drag
            - force_at(model.force, times[n - k])
        )
        worst = max(worst, float(np.max(np.abs(r))))
    return worst
