"""Tests for the discrete Menger energy and its differential."""

from itertools import permutations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from mengerflow.energy import (
    EnergyParams,
    brute_force_energy,
    energy_differential,
    finite_difference_differential,
    kernel_rpq_inverse,
    local_contribution,
    total_energy,
)
from mengerflow.errors import MidpointCollision, NonDistinctEdges
from mengerflow.geometry import (
    Polyline,
    add_vertex_noise,
    generate_torus_knot,
    regular_polygon,
)

EQUILATERAL = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, np.sqrt(3.0) / 2.0, 0.0]]
)


class TestEnergyParams:
    def test_defaults(self):
        params = EnergyParams()
        assert params.p == 2.5
        assert params.q == 2.0
        assert params.sobolev_order == pytest.approx(1.75)
        assert params.homogeneity_degree == pytest.approx(-0.5)

    @pytest.mark.parametrize("p", [2.3, 2.7, 7.0 / 3.0])
    def test_p_outside_range_rejected(self, p):
        with pytest.raises(ValueError, match="p must lie in"):
            EnergyParams(p=p)

    def test_p_outside_range_allowed_on_request(self):
        assert EnergyParams(p=3.0, allow_outside_range=True).p == 3.0

    def test_only_hilbert_case(self):
        with pytest.raises(ValueError, match="q = 2"):
            EnergyParams(q=3.0)


class TestKernel:
    def test_collinear_points_vanish(self, params):
        x, y, z = np.array([0.0, 0, 0]), np.array([1.0, 0, 0]), np.array([3.0, 0, 0])
        assert kernel_rpq_inverse(x, y, z, params) == 0.0

    def test_equilateral_triangle_value(self, params):
        x, y, z = EQUILATERAL
        expected = (3.0 / 4.0) / 1.0**params.p
        assert kernel_rpq_inverse(x, y, z, params) == pytest.approx(expected)

    def test_collision_guard(self, params):
        x = np.zeros(3)
        with pytest.raises(MidpointCollision):
            kernel_rpq_inverse(x, x, np.ones(3), params)


class TestLocalContribution:
    def test_permutation_symmetry(self, trefoil, params):
        values = {
            local_contribution(trefoil, *triple, params)
            for triple in permutations((1, 7, 15))
        }
        assert len(values) == 1

    def test_repeated_edge_rejected(self, trefoil, params):
        with pytest.raises(NonDistinctEdges):
            local_contribution(trefoil, 2, 2, 5, params)

    def test_sums_to_total_energy(self, noisy_octagon, params):
        assert total_energy(noisy_octagon, params) == pytest.approx(
            brute_force_energy(noisy_octagon, params), rel=1e-12
        )


class TestTotalEnergy:
    def test_equilateral_triangle_closed_form(self, params):
        P = Polyline.from_points(EQUILATERAL)
        expected = 6.0 * (3.0 / 64.0) * 8.0**2.5
        assert total_energy(P, params) == pytest.approx(expected, rel=1e-10)
        assert expected == pytest.approx(50.9117, abs=1e-4)

    def test_planar_triangle_differential_shape(self, params):
        report = energy_differential(Polyline.from_points(EQUILATERAL), params)
        assert report.triple_count == 1
        assert report.differential.shape == (3, 3)

    @pytest.mark.parametrize("p", [2.4, 2.5, 2.6])
    @pytest.mark.parametrize("mu", [0.5, 2.0])
    def test_homogeneity(self, p, mu):
        params = EnergyParams(p=p)
        P = generate_torus_knot(2, 3, 24)
        energy = total_energy(P, params)
        scaled = total_energy(P.scaled(mu), params)
        assert abs(scaled - mu ** (7.0 - 3.0 * p) * energy) <= 1e-10 * energy

    def test_invariant_under_rigid_motion(self, trefoil, params):
        angle = 1.1
        rotation = np.array(
            [
                [1, 0, 0],
                [0, np.cos(angle), -np.sin(angle)],
                [0, np.sin(angle), np.cos(angle)],
            ]
        )
        moved = trefoil.rotated(rotation).translated(np.array([0.3, -2.0, 5.0]))
        assert total_energy(moved, params) == pytest.approx(
            total_energy(trefoil, params), rel=1e-12
        )

    def test_thread_count_does_not_change_result(self, trefoil):
        serial = energy_differential(trefoil, EnergyParams(workers=1))
        threaded = energy_differential(trefoil, EnergyParams(workers=4))
        assert serial.value == threaded.value
        np.testing.assert_array_equal(serial.differential, threaded.differential)

    def test_report_value_matches_total_energy(self, trefoil, params):
        report = energy_differential(trefoil, params)
        assert report.value == pytest.approx(total_energy(trefoil, params), rel=1e-13)

    def test_coincident_midpoints_raise(self, params):
        # the curve runs back and forth along one segment
        P = Polyline.from_points(
            np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0], [1, 0, 0]], dtype=float)
        )
        with pytest.raises(MidpointCollision):
            total_energy(P, params)


def test_differential_matches_finite_differences(params):
    """Analytic differential against central differences on 20 random octagons."""
    for seed in range(20):
        P = add_vertex_noise(regular_polygon(8), 0.1, seed=seed)
        analytic = energy_differential(P, params).differential
        numeric = finite_difference_differential(P, params, h=1e-5 * P.diameter())
        error = np.max(np.abs(analytic - numeric)) / np.max(np.abs(numeric))
        assert error <= 1e-6, f"seed {seed}: relative error {error:.3e}"


def test_regular_polygon_differential_is_radial(params):
    P = regular_polygon(12)
    differential = energy_differential(P, params).differential
    radial = P.points / np.linalg.norm(P.points, axis=1)[:, None]
    tangential = differential - np.sum(differential * radial, axis=1)[:, None] * radial
    assert np.max(np.abs(tangential)) <= 1e-10 * np.max(np.abs(differential))


class TestDifferentialInvariants:
    @pytest.mark.parametrize("name", ["trefoil", "noisy_octagon"])
    def test_translation_nullity(self, name, params, request):
        report = energy_differential(request.getfixturevalue(name), params)
        column_sums = report.differential.sum(axis=0)
        assert np.linalg.norm(column_sums) <= 1e-9 * report.norm

    def test_rotation_equivariance(self, noisy_octagon, params):
        rotation = Rotation.from_rotvec([0.4, 1.3, -0.8]).as_matrix()
        moved = noisy_octagon.rotated(rotation).translated(np.array([2.0, 0.0, -1.0]))
        report = energy_differential(noisy_octagon, params)
        rotated = energy_differential(moved, params)
        np.testing.assert_allclose(
            rotated.differential,
            report.differential @ rotation.T,
            rtol=0,
            atol=1e-10 * report.norm,
        )
        assert rotated.norm == pytest.approx(report.norm, rel=1e-10)

    def test_central_differences_converge_quadratically(self, noisy_octagon, params):
        analytic = energy_differential(noisy_octagon, params).differential
        h = 4e-3 * noisy_octagon.diameter()
        errors = [
            np.max(
                np.abs(
                    finite_difference_differential(noisy_octagon, params, step)
                    - analytic
                )
            )
            for step in (h, h / 2.0)
        ]
        assert 3.5 < errors[0] / errors[1] < 4.5
