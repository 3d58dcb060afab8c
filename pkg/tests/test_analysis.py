"""Tests for error measurement, slope fitting and trajectory bookkeeping."""

from __future__ import annotations

import numpy as np
import pytest

from fracvi.analysis import (
    ConvergenceReport,
    compare,
    convergence_summary,
    energy_series,
    fit_slope,
    global_error,
    reverse,
    write_convergence_csv,
)
from fracvi.fracops import Grid
from fracvi.integrators import IntegratorConfig, Trajectory, fvi_run, ham_fvi_run
from fracvi.models import quadratic_model


def sampled_trajectory(fn, grid: Grid) -> Trajectory:
    """Wrap samples of a scalar function of time as a trajectory."""
    x = fn(grid.times).reshape(-1, 1)
    return Trajectory(
        grid=grid,
        x=x,
        p=np.zeros_like(x),
        energy=np.zeros(grid.n_steps + 1),
        newton_iters=np.zeros(grid.n_steps, dtype=int),
    )


class TestFitSlope:
    def test_exact_first_order(self):
        h = np.array([0.4, 0.2, 0.1, 0.05])
        report = fit_slope(h, 3.0 * h)
        assert report.slope == pytest.approx(1.0, abs=1e-12)
        assert np.exp(report.intercept) == pytest.approx(3.0, rel=1e-12)

    def test_exact_second_order(self):
        h = np.array([0.4, 0.2, 0.1])
        report = fit_slope(h, 0.5 * h**2)
        assert report.slope == pytest.approx(2.0, abs=1e-12)

    def test_input_order_does_not_matter(self):
        h = np.array([0.1, 0.4, 0.2])
        report = fit_slope(h, 2.0 * h**1.5)
        assert np.all(np.diff(report.h_values) < 0)
        assert report.slope == pytest.approx(1.5, abs=1e-12)

    def test_zero_error_marks_degenerate(self):
        report = fit_slope([0.4, 0.2, 0.1], [1e-3, 0.0, 1e-5])
        assert report.degenerate
        assert np.isnan(report.slope) and np.isnan(report.intercept)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_slope([0.4, 0.2], [1.0, 0.5])

    def test_report_validation(self):
        with pytest.raises(ValueError):
            ConvergenceReport(
                h_values=np.array([0.1, 0.1, 0.05]),
                errors=np.ones(3),
                slope=1.0,
                intercept=0.0,
            )


class TestGlobalError:
    def test_identical_trajectories(self):
        grid = Grid(t0=0.0, h=0.1, n_steps=10)
        traj = sampled_trajectory(np.sin, grid)
        assert global_error(traj, traj) == 0.0

    def test_constant_offset(self):
        grid = Grid(t0=0.0, h=0.1, n_steps=10)
        a = sampled_trajectory(np.sin, grid)
        b = sampled_trajectory(lambda t: np.sin(t) + 0.25, grid)
        assert global_error(a, b) == pytest.approx(0.25, rel=1e-12)

    def test_subsampling_a_finer_reference(self):
        coarse = sampled_trajectory(lambda t: t**2, Grid(t0=0.0, h=0.2, n_steps=10))
        fine = sampled_trajectory(lambda t: t**2, Grid(t0=0.0, h=0.05, n_steps=40))
        assert global_error(coarse, fine) <= 1e-14

    def test_reference_must_cover_horizon(self):
        coarse = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.2, n_steps=10))
        short = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.05, n_steps=30))
        with pytest.raises(ValueError):
            global_error(coarse, short)

    def test_incommensurate_steps_rejected(self):
        a = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.2, n_steps=10))
        b = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.15, n_steps=20))
        with pytest.raises(ValueError):
            global_error(a, b)

    def test_different_start_times_rejected(self):
        a = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.1, n_steps=10))
        b = sampled_trajectory(np.sin, Grid(t0=1.0, h=0.05, n_steps=40))
        with pytest.raises(ValueError):
            global_error(a, b)

    def test_callable_reference(self):
        grid = Grid(t0=0.0, h=0.1, n_steps=10)
        traj = sampled_trajectory(np.cos, grid)
        err = global_error(traj, lambda t: np.cos(t) - 0.1)
        assert err == pytest.approx(0.1, rel=1e-12)

    def test_unknown_quantity(self):
        grid = Grid(t0=0.0, h=0.1, n_steps=10)
        traj = sampled_trajectory(np.sin, grid)
        with pytest.raises(ValueError):
            global_error(traj, traj, quantity="momentum_flux")

    def test_energy_quantity(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        cfg = IntegratorConfig(h=0.2, n_steps=30, x0=np.array([1.0]), p0=np.array([0.5]))
        traj = fvi_run(model, cfg)
        assert global_error(traj, traj, quantity="energy") == 0.0


class TestCompare:
    def test_same_run_is_zero(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        cfg = IntegratorConfig(h=0.2, n_steps=30, x0=np.array([1.0]), p0=np.array([0.5]))
        assert compare(fvi_run(model, cfg), fvi_run(model, cfg)) == 0.0

    def test_grid_mismatch(self):
        a = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.1, n_steps=10))
        b = sampled_trajectory(np.sin, Grid(t0=0.0, h=0.1, n_steps=12))
        with pytest.raises(ValueError):
            compare(a, b)


class TestReverse:
    def test_involution(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        cfg = IntegratorConfig(
            h=0.1, n_steps=25, x0=np.array([1.0]), p0=np.array([0.5]), alpha=0.3
        )
        traj = fvi_run(model, cfg)
        back = reverse(reverse(traj))
        assert np.array_equal(back.x, traj.x)
        assert np.array_equal(back.p, traj.p)
        assert back.time_reversed == traj.time_reversed

    def test_flags_and_order(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        cfg = IntegratorConfig(h=0.1, n_steps=25, x0=np.array([1.0]), p0=np.array([0.5]))
        traj = fvi_run(model, cfg)
        rev = reverse(traj)
        assert rev.time_reversed
        assert np.array_equal(rev.x[0], traj.x[-1])
        assert np.array_equal(rev.energy, traj.energy[::-1])

    def test_momentum_sequence_reversed_too(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.4)
        cfg = IntegratorConfig(
            h=0.1, n_steps=25, x0=np.array([1.0]), p0=np.array([0.5]), alpha=0.4
        )
        traj = ham_fvi_run(model, cfg)
        rev = reverse(traj)
        assert np.array_equal(rev.p_alpha, traj.p_alpha[::-1])


class TestEnergySeries:
    def test_matches_stored_energies(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        cfg = IntegratorConfig(h=0.2, n_steps=40, x0=np.array([1.0]), p0=np.array([0.5]))
        traj = fvi_run(model, cfg)
        assert np.array_equal(energy_series(model, traj), traj.energy)

    def test_undamped_energy_is_flat(self):
        """A long conservative run must show bounded, non-drifting energy."""
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.0)
        cfg = IntegratorConfig(
            h=0.1, n_steps=1000, x0=np.array([1.0]), p0=np.array([0.0])
        )
        series = energy_series(model, fvi_run(model, cfg))
        assert np.max(np.abs(series - series[0])) <= 1e-10


class TestReportOutput:
    def test_csv_layout(self, tmp_path):
        report = fit_slope([0.4, 0.2, 0.1], [0.8, 0.4, 0.2])
        out = tmp_path / "report.csv"
        write_convergence_csv(report, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "h,error,fitted_slope"
        assert len(lines) == 4
        h, e, s = (float(v) for v in lines[1].split(","))
        assert (h, e) == (0.4, 0.8)
        assert s == pytest.approx(1.0, abs=1e-12)

    def test_summary_mentions_slope(self):
        report = fit_slope([0.4, 0.2, 0.1], [0.8, 0.4, 0.2])
        text = convergence_summary(report)
        assert "fitted slope 1.0000" in text

    def test_summary_flags_degenerate(self):
        report = fit_slope([0.4, 0.2, 0.1], [0.8, 0.0, 0.2])
        assert "degenerate" in convergence_summary(report)
