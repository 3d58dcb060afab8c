"""Mechanical system descriptions: mass, potential, damping, external force.

A :class:`MechModel` collects the data of the continuous problem

.. math::

    m \\ddot x + \\nabla U(x) + \\rho \\, D^{2\\alpha} x = F(t),

with diagonal mass and damping matrices stored as 1-D arrays.  The fractional
order itself is not part of the model; it belongs to the integrator
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np


class Potential(Protocol):
    """Anything exposing a scalar value and its gradient."""

    def value(self, x: np.ndarray) -> float: ...

    def gradient(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class Quadratic:
    """Diagonal quadratic potential ``U(x) = x . c x / 2``."""

    c: np.ndarray

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.c, dtype=float)).copy()
        if c.ndim != 1 or not np.all(c > 0):
            raise ValueError("stiffness coefficients must be a positive 1-D array")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    def value(self, x: np.ndarray) -> float:
        return 0.5 * float(np.dot(x, self.c * x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.c * x

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return np.diag(self.c)


@dataclass(frozen=True)
class CallablePotential:
    """Wrap user-supplied value/gradient callables (Hessian optional)."""

    value_fn: Callable[[np.ndarray], float]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    hessian_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def value(self, x: np.ndarray) -> float:
        return float(self.value_fn(x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.gradient_fn(x), dtype=float)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self.hessian_fn is None:
            raise AttributeError("no Hessian supplied")
        return np.asarray(self.hessian_fn(x), dtype=float)


@dataclass(frozen=True)
class ExternalForce:
    """Piecewise-constant force given as ``(t_start, t_end, value)`` rows.

    Intervals are closed at both ends; where rows overlap the last matching
    row wins, and outside every interval the force is zero.
    """

    intervals: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        rows = []
        for row in self.intervals:
            t_start, t_end, value = row
            if not t_end >= t_start:
                raise ValueError(f"interval ({t_start}, {t_end}) has t_end < t_start")
            rows.append((float(t_start), float(t_end), float(value)))
        object.__setattr__(self, "intervals", tuple(rows))


def force_at(force: ExternalForce | None, t: float) -> float:
    """Evaluate a piecewise-constant force table at time ``t``."""
    if force is None:
        return 0.0
    value = 0.0
    for t_start, t_end, row_value in force.intervals:
        if t_start <= t <= t_end:
            value = row_value
    return value


@dataclass(frozen=True)
class MechModel:
    """Mechanical system with diagonal mass and damping.

    ``mass`` and ``damping`` are broadcast to 1-D float arrays of the system
    dimension; mass entries must be positive and damping entries nonnegative.
    """

    mass: np.ndarray
    damping: np.ndarray
    potential: Potential
    force: ExternalForce | None = None

    def __post_init__(self) -> None:
        mass = np.atleast_1d(np.asarray(self.mass, dtype=float)).copy()
        damping = np.atleast_1d(np.asarray(self.damping, dtype=float)).copy()
        if mass.ndim != 1 or not np.all(mass > 0):
            raise ValueError("mass entries must be positive")
        damping = np.broadcast_to(damping, mass.shape).copy()
        if not np.all(damping >= 0):
            raise ValueError("damping entries must be nonnegative")
        mass.flags.writeable = False
        damping.flags.writeable = False
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "damping", damping)

    @property
    def dim(self) -> int:
        return self.mass.shape[0]


def energy(model: MechModel, x: np.ndarray, p: np.ndarray) -> float:
    """Mechanical energy ``p . m^-1 p / 2 + U(x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if x.shape != (model.dim,) or p.shape != (model.dim,):
        raise ValueError(
            f"state shape {x.shape}/{p.shape} does not match model dim {model.dim}"
        )
    return 0.5 * float(np.dot(p, p / model.mass)) + model.potential.value(x)


def quadratic_model(
    mass: float | Sequence[float],
    stiffness: float | Sequence[float],
    damping: float | Sequence[float],
    force: ExternalForce | None = None,
) -> MechModel:
    """Convenience constructor for the linear (diagonal quadratic) model."""
    mass = np.atleast_1d(np.asarray(mass, dtype=float))
    stiffness = np.broadcast_to(
        np.atleast_1d(np.asarray(stiffness, dtype=float)), mass.shape
    )
    return MechModel(
        mass=mass,
        damping=np.asarray(damping, dtype=float),
        potential=Quadratic(c=stiffness),
        force=force,
    )
