"""Tests for mechanical model containers: potentials, forces, energy."""

from __future__ import annotations

import numpy as np
import pytest

from fracvi.models import (
    CallablePotential,
    ExternalForce,
    MechModel,
    Quadratic,
    energy,
    force_at,
    quadratic_model,
)


class TestQuadratic:
    def test_scalar_values(self):
        pot = Quadratic(c=np.array([2.0]))
        x = np.array([3.0])
        assert pot.value(x) == pytest.approx(9.0)
        assert pot.gradient(x) == pytest.approx([6.0])
        assert np.array_equal(pot.hessian(x), [[2.0]])

    def test_quadratic_scaling(self):
        pot = Quadratic(c=np.array([1.0, 4.0]))
        x = np.array([1.0, -2.0])
        assert pot.value(2 * x) == pytest.approx(4 * pot.value(x))

    def test_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(23)
        pot = Quadratic(c=np.array([1.0, 2.5, 0.3]))
        x = rng.standard_normal(3)
        grad = pot.gradient(x)
        eps = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = eps
            fd = (pot.value(x + e) - pot.value(x - e)) / (2 * eps)
            assert grad[i] == pytest.approx(fd, rel=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            Quadratic(c=np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            Quadratic(c=np.array([0.0]))


class TestCallablePotential:
    def test_quartic(self):
        pot = CallablePotential(
            value_fn=lambda x: float(np.sum(x**4)),
            gradient_fn=lambda x: 4.0 * x**3,
        )
        x = np.array([2.0])
        assert pot.value(x) == pytest.approx(16.0)
        assert pot.gradient(x) == pytest.approx([32.0])
        with pytest.raises(AttributeError):
            pot.hessian(x)

    def test_with_hessian(self):
        pot = CallablePotential(
            value_fn=lambda x: float(0.5 * x @ x),
            gradient_fn=lambda x: x,
            hessian_fn=lambda x: np.eye(x.size),
        )
        assert np.array_equal(pot.hessian(np.zeros(2)), np.eye(2))


class TestExternalForce:
    def test_closed_interval_endpoints(self):
        force = ExternalForce(intervals=((0.0, 1.0, 8.0),))
        assert force_at(force, 0.0) == 8.0
        assert force_at(force, 1.0) == 8.0
        assert force_at(force, 0.5) == 8.0
        assert force_at(force, 1.0 + 1e-12) == 0.0
        assert force_at(force, -1e-12) == 0.0

    def test_last_interval_wins(self):
        force = ExternalForce(intervals=((0.0, 2.0, 1.0), (1.0, 3.0, -4.0)))
        assert force_at(force, 0.5) == 1.0
        assert force_at(force, 1.5) == -4.0
        assert force_at(force, 2.5) == -4.0

    def test_none_is_zero(self):
        assert force_at(None, 0.3) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            ExternalForce(intervals=((1.0, 0.5, 2.0),))


class TestMechModel:
    def test_damping_broadcasts_to_mass(self):
        model = MechModel(
            mass=np.array([2.0, 3.0]),
            damping=0.5,
            potential=Quadratic(c=np.array([1.0, 1.0])),
        )
        assert model.dim == 2
        assert np.array_equal(model.mass, [2.0, 3.0])
        assert np.array_equal(model.damping, [0.5, 0.5])

    def test_validation(self):
        with pytest.raises(ValueError):
            MechModel(mass=0.0, damping=0.0, potential=Quadratic(c=np.array([1.0])))
        with pytest.raises(ValueError):
            MechModel(mass=1.0, damping=-0.1, potential=Quadratic(c=np.array([1.0])))

    def test_quadratic_model_helper(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        assert model.dim == 1
        assert isinstance(model.potential, Quadratic)
        assert np.array_equal(model.potential.c, [1.0])


class TestEnergy:
    def test_reference_point(self):
        # E = p^2 / 2m + c x^2 / 2 at x=1, p=0.5, m=c=1 gives 0.625.
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.2)
        assert energy(model, np.array([1.0]), np.array([0.5])) == pytest.approx(0.625)

    def test_zero_state(self):
        model = quadratic_model(mass=3.0, stiffness=2.0, damping=0.0)
        assert energy(model, np.zeros(1), np.zeros(1)) == 0.0

    def test_vector_state(self):
        model = MechModel(
            mass=np.array([1.0, 2.0]),
            damping=0.0,
            potential=Quadratic(c=np.array([1.0, 4.0])),
        )
        x = np.array([1.0, 1.0])
        p = np.array([2.0, 2.0])
        # p^2/2m = 2 + 1, U = (1 + 4)/2
        assert energy(model, x, p) == pytest.approx(5.5)

    def test_dimension_mismatch(self):
        model = quadratic_model(mass=1.0, stiffness=1.0, damping=0.0)
        with pytest.raises(ValueError):
            energy(model, np.zeros(2), np.zeros(2))
