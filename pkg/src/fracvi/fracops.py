"""Discrete fractional operators on uniform grids.

Everything in this module is built from the Grunwald-Letnikov coefficient
family

.. math::

    \\alpha_0 = 1, \\qquad
    \\alpha_n = \\frac{-\\alpha (1 - \\alpha)(2 - \\alpha) \\cdots
        (n - 1 - \\alpha)}{n!},

which are the Taylor coefficients of ``(1 - z)**alpha``.  On a uniform grid
with step ``h`` they define the retarded (backward-looking) and advanced
(forward-looking) difference operators of order ``alpha``

.. math::

    (\\Delta_-^\\alpha z)_k = h^{-\\alpha} \\sum_{n=0}^{k} \\alpha_n z_{k-n},
    \\qquad
    (\\Delta_+^\\alpha z)_k = h^{-\\alpha} \\sum_{n=0}^{N-k} \\alpha_n z_{k+n},

with the convention that the sums never reach past the ends of the grid, so
at the boundary nodes they collapse to ``alpha_0 z / h**alpha``.

The iterated operator of order ``2 * alpha`` uses the self-convolution of the
coefficient table,

.. math::

    c_m = \\sum_{j=0}^{m} \\alpha_j \\alpha_{m-j},

so that ``delta_minus_squared`` evaluates ``Delta_-^alpha Delta_-^alpha``
with a single weighted sum.  Two classical special cases pin the scale: for
``alpha = 1`` the ``c`` table is ``1, -2, 1, 0, ...`` (the second difference)
and for ``alpha = 1/2`` it telescopes to ``1, -1, 0, ...`` (the first
difference), which is what makes half-order damping collapse to classical
linear damping.

All operators are plain weighted sums evaluated with the precomputed table;
each evaluation costs O(k).  Fast-transform convolution is deliberately not
used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz


@dataclass(frozen=True)
class GrunwaldTable:
    """Precomputed Grunwald-Letnikov weights of order ``alpha``.

    ``coeffs[n]`` holds ``alpha_n`` for ``n = 0 .. n_max`` and ``squared[m]``
    holds the self-convolution ``c_m``.  Instances are produced by
    :func:`grunwald_coeffs`; the arrays are read-only.
    """

    alpha: float
    n_max: int
    coeffs: np.ndarray
    squared: np.ndarray

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.n_max + 1 or len(self.squared) != self.n_max + 1:
            raise ValueError("coefficient arrays must have length n_max + 1")


@dataclass(frozen=True)
class Grid:
    """Uniform time grid ``t_k = t0 + k * h`` for ``k = 0 .. n_steps``."""

    t0: float
    h: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise ValueError(f"grid step must be positive, got h={self.h}")
        if self.n_steps < 2:
            raise ValueError(f"grid needs at least 2 steps, got {self.n_steps}")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def t_final(self) -> float:
        return self.t0 + self.h * self.n_steps


def grunwald_coeffs(alpha: float, n_max: int) -> GrunwaldTable:
    """Build the coefficient table for order ``alpha`` up to index ``n_max``.

    Uses the stable one-step recurrence
    ``alpha_n = alpha_{n-1} * (n - 1 - alpha) / n`` rather than factorials.
    For ``alpha`` in [0, 1] this gives ``alpha_0 = 1``, ``alpha_1 = -alpha``
    and then a nonpositive tail whose magnitudes decrease monotonically.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"fractional order must lie in [0, 1], got alpha={alpha}")
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    coeffs = np.concatenate(([1.0], np.cumprod((n - 1.0 - alpha) / n)))
    squared = np.convolve(coeffs, coeffs)[: n_max + 1]
    coeffs.flags.writeable = False
    squared.flags.writeable = False
    return GrunwaldTable(alpha=alpha, n_max=n_max, coeffs=coeffs, squared=squared)


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> np.ndarray | float:
    out = np.dot(weights, values)
    return float(out) if np.ndim(out) == 0 else out


def _check_history(z: np.ndarray, table: GrunwaldTable, h: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim not in (1, 2):
        raise ValueError("state history must be a 1-D or 2-D array")
    if z.shape[0] == 0:
        raise ValueError("state history must contain at least one node")
    if z.shape[0] - 1 > table.n_max:
        raise ValueError(
            f"history of length {z.shape[0]} exceeds table with n_max={table.n_max}"
        )
    if not h > 0:
        raise ValueError(f"step must be positive, got h={h}")
    return z


def delta_minus(z: np.ndarray, table: GrunwaldTable, h: float) -> np.ndarray | float:
    """Retarded difference at index ``k`` given the prefix ``z_0 .. z_k``.

    ``z`` holds the full history up to and including the evaluation node,
    oldest first.  Returns ``h**-alpha * sum_n alpha_n * z[k - n]``.
    """
    z = _check_history(z, table, h)
    k = z.shape[0] - 1
    return h ** (-table.alpha) * _weighted_sum(table.coeffs[: k + 1], z[::-1])


def delta_plus(z: np.ndarray, table: GrunwaldTable, h: float) -> np.ndarray | float:
    """Advanced difference at index ``k`` given the suffix ``z_k .. z_N``.

    ``z`` holds the evaluation node first and the future nodes after it.
    Returns ``h**-alpha * sum_n alpha_n * z[k + n]``.
    """
    z = _check_history(z, table, h)
    return h ** (-table.alpha) * _weighted_sum(table.coeffs[: z.shape[0]], z)


def delta_minus_squared(
    z: np.ndarray, table: GrunwaldTable, h: float
) -> np.ndarray | float:
    """Iterated retarded difference ``Delta_-^alpha Delta_-^alpha`` at ``k``.

    Same calling convention as :func:`delta_minus` but weighted with the
    convolution-square table, so the result has order ``2 * alpha``.
    """
    z = _check_history(z, table, h)
    k = z.shape[0] - 1
    return h ** (-2.0 * table.alpha) * _weighted_sum(table.squared[: k + 1], z[::-1])


def delta_plus_squared(
    z: np.ndarray, table: GrunwaldTable, h: float
) -> np.ndarray | float:
    """Iterated advanced difference, suffix convention of :func:`delta_plus`."""
    z = _check_history(z, table, h)
    return h ** (-2.0 * table.alpha) * _weighted_sum(table.squared[: z.shape[0]], z)


def operator_matrix(
    beta: float, grid: Grid, table: GrunwaldTable | None = None
) -> np.ndarray:
    """Dense matrix of the retarded operator of order ``beta`` in (0, 2].

    Row ``k`` reproduces ``delta_minus_squared`` of order ``beta / 2``
    evaluated at node ``k``, so the matrix is lower-triangular Toeplitz with
    first column ``h**-beta * c_m``.  ``table`` may supply a precomputed
    half-order coefficient table (its order must equal ``beta / 2`` and it
    must cover the grid); otherwise one is built.
    """
    beta = float(beta)
    if not 0.0 < beta <= 2.0:
        raise ValueError(f"operator order must lie in (0, 2], got beta={beta}")
    if table is None:
        table = grunwald_coeffs(beta / 2.0, grid.n_steps)
    else:
        if table.alpha != beta / 2.0:
            raise ValueError(
                f"table order {table.alpha} does not match beta/2 = {beta / 2.0}"
            )
        if table.n_max < grid.n_steps:
            raise ValueError("table does not cover the grid")
    n = grid.n_steps + 1
    column = grid.h ** (-beta) * table.squared[:n]
    return toeplitz(column, np.zeros(n))
