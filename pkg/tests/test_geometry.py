"""Tests for the polyline data model, diagnostics and generators."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from mengerflow.errors import DegenerateEdge, InvalidParams
from mengerflow.geometry import (
    Partition,
    Polyline,
    add_vertex_noise,
    barycenter,
    bilipschitz_constant,
    edge_length,
    generate_square_knot,
    generate_torus_knot,
    geometry_diagnostics,
    is_embedded,
    midpoints,
    periodic_distance,
    regular_polygon,
    segment_distances,
    self_intersection_distance,
    tangent_lipschitz_constant,
    theta_eigenvalue_lower_bound,
    theta_min_eigenvalue,
    turning_angles,
    unit_edge_vector,
    unit_edge_vectors,
)


class TestPartition:
    def test_uniform_partition(self):
        T = Partition.uniform(8)
        np.testing.assert_allclose(T.edge_lengths, np.full(8, 1 / 8))
        assert T.edge_lengths.sum() == pytest.approx(1.0)
        assert T.is_uniform()

    def test_wrapping_edge_and_midpoints(self):
        T = Partition(vertex_params=np.array([0.1, 0.4, 0.8]))
        np.testing.assert_allclose(T.edge_lengths, [0.3, 0.4, 0.3])
        np.testing.assert_allclose(T.param_midpoints, [0.25, 0.6, 0.95])
        assert not T.is_uniform()

    def test_vertex_weights_sum_to_one(self):
        T = Partition(vertex_params=np.array([0.0, 0.1, 0.5, 0.7]))
        assert T.vertex_weights.sum() == pytest.approx(1.0)

    def test_rejects_too_few_vertices(self):
        with pytest.raises(ValueError, match="N >= 3"):
            Partition.uniform(2)

    def test_rejects_unsorted_params(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            Partition(vertex_params=np.array([0.0, 0.5, 0.3]))

    def test_fingerprint_identifies_partition(self):
        assert Partition.uniform(6).fingerprint() == Partition.uniform(6).fingerprint()
        assert Partition.uniform(6).fingerprint() != Partition.uniform(7).fingerprint()


class TestPolyline:
    def test_unit_square_edges(self, unit_square):
        np.testing.assert_allclose(unit_square.edge_lengths, np.ones(4))
        assert edge_length(unit_square, 3) == 1.0
        np.testing.assert_allclose(unit_edge_vector(unit_square, 1), [0, 1, 0])

    def test_midpoints(self, unit_square):
        spatial, param = midpoints(unit_square, 0)
        np.testing.assert_allclose(spatial, [0.5, 0, 0])
        assert param == pytest.approx(0.125)

    def test_points_are_read_only(self, unit_square):
        with pytest.raises(ValueError):
            unit_square.points[0, 0] = 5.0

    def test_zero_edge_is_representable_but_not_regular(self):
        P = Polyline.from_points(
            np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        )
        assert edge_length(P, 0) == 0.0
        assert not P.is_regular
        with pytest.raises(DegenerateEdge, match="edge 0"):
            unit_edge_vector(P, 0)

    def test_edge_index_out_of_range(self, unit_square):
        with pytest.raises(InvalidParams, match="out of range"):
            edge_length(unit_square, 4)

    def test_mismatched_partition(self):
        with pytest.raises(ValueError, match="partition"):
            Polyline(points=np.zeros((4, 3)), partition=Partition.uniform(5))

    def test_rigid_motion_preserves_lengths(self, trefoil):
        angle = 0.3
        rotation = np.array(
            [
                [np.cos(angle), -np.sin(angle), 0],
                [np.sin(angle), np.cos(angle), 0],
                [0, 0, 1],
            ]
        )
        moved = trefoil.rotated(rotation).translated(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(moved.edge_lengths, trefoil.edge_lengths)


class TestDiagnostics:
    def test_periodic_distance(self):
        assert periodic_distance(0.1, 0.9) == pytest.approx(0.2)
        assert periodic_distance(0.0, 0.5) == pytest.approx(0.5)

    def test_unit_square_bilipschitz(self, unit_square):
        assert bilipschitz_constant(unit_square) == pytest.approx(2 * np.sqrt(2))

    def test_unit_square_turning_angles(self, unit_square):
        np.testing.assert_allclose(turning_angles(unit_square), np.full(4, np.pi / 2))

    def test_unit_square_barycenter_and_theta(self, unit_square):
        np.testing.assert_allclose(barycenter(unit_square), [0.5, 0.5, 0.0])
        assert theta_min_eigenvalue(unit_square) == pytest.approx(0.5)

    def test_geometry_diagnostics_bundle(self, unit_square):
        diag = geometry_diagnostics(unit_square)
        assert diag.total_length == pytest.approx(4.0)
        assert diag.max_turning_angle == pytest.approx(np.pi / 2)
        assert diag.barycenter == pytest.approx([0.5, 0.5, 0.0])

    def test_segment_distances(self):
        a0 = np.array([[0.0, 0, -1], [0.0, 0, 0]])
        a1 = np.array([[0.0, 0, 1], [1.0, 0, 0]])
        b0 = np.array([[-1.0, 0.5, 0], [2.0, 0, 0]])
        b1 = np.array([[1.0, 0.5, 0], [3.0, 0, 0]])
        np.testing.assert_allclose(segment_distances(a0, a1, b0, b1), [0.5, 1.0])

    def test_embedded_trefoil(self, trefoil):
        assert is_embedded(trefoil)
        assert self_intersection_distance(trefoil) > 0.1

    def test_figure_eight_projection_is_not_embedded(self):
        # planar bow tie: edges 0 and 2 cross at the origin
        P = Polyline.from_points(
            np.array([[-1, -1, 0], [1, 1, 0], [1, -1, 0], [-1, 1, 0]], dtype=float)
        )
        assert self_intersection_distance(P) == pytest.approx(0.0, abs=1e-15)
        assert not is_embedded(P)

    def test_barycenter_follows_translation(self, trefoil):
        offset = np.array([0.7, -3.0, 12.5])
        np.testing.assert_allclose(
            barycenter(trefoil.translated(offset)),
            barycenter(trefoil) + offset,
            rtol=0,
            atol=1e-13,
        )

    @pytest.mark.parametrize("mu", [0.25, 3.0])
    def test_bilipschitz_scales_linearly(self, trefoil, mu):
        assert bilipschitz_constant(trefoil.scaled(mu)) == pytest.approx(
            mu * bilipschitz_constant(trefoil), rel=1e-12
        )

    def test_theta_eigenvalue_rotation_invariant(self, noisy_octagon):
        rotation = Rotation.from_rotvec([0.3, -1.2, 0.7]).as_matrix()
        rotated = noisy_octagon.rotated(rotation)
        assert theta_min_eigenvalue(rotated) == pytest.approx(
            theta_min_eigenvalue(noisy_octagon), abs=1e-12
        )

    def test_weighted_tangents_sum_to_zero(self, noisy_octagon, trefoil):
        for P in (noisy_octagon, trefoil):
            total = np.sum(P.edge_lengths[:, None] * unit_edge_vectors(P), axis=0)
            np.testing.assert_allclose(total, np.zeros(3), atol=1e-12)

    @pytest.mark.parametrize("a, b", [(2, 3), (5, 3)])
    def test_theta_eigenvalue_bound(self, a, b):
        P = generate_torus_knot(a, b, 96)
        bound = theta_eigenvalue_lower_bound(tangent_lipschitz_constant(P), alpha=1.0)
        assert 0.0 < bound <= theta_min_eigenvalue(P)


class TestGenerators:
    def test_torus_knot_shape_and_regularity(self):
        P = generate_torus_knot(2, 3, 48)
        assert P.points.shape == (48, 3)
        assert P.partition.is_uniform()
        assert is_embedded(P)

    def test_torus_knot_requires_coprime(self):
        with pytest.raises(InvalidParams, match="gcd"):
            generate_torus_knot(2, 4, 48)

    def test_torus_knot_requires_three_vertices(self):
        with pytest.raises(InvalidParams, match="N >= 3"):
            generate_torus_knot(2, 3, 2)

    def test_regular_polygon(self):
        P = regular_polygon(24, radius=2.0)
        np.testing.assert_allclose(
            P.edge_lengths, np.full(24, 4.0 * np.sin(np.pi / 24))
        )
        np.testing.assert_allclose(barycenter(P), np.zeros(3), atol=1e-14)

    def test_square_knot_is_embedded_and_centered(self):
        P = generate_square_knot(96)
        lengths = P.edge_lengths
        assert lengths.max() / lengths.min() < 1.5
        assert is_embedded(P)
        np.testing.assert_allclose(P.points.mean(axis=0), np.zeros(3), atol=1e-12)

    def test_noise_is_seeded(self):
        base = regular_polygon(16)
        first = add_vertex_noise(base, 1e-3, seed=5)
        second = add_vertex_noise(base, 1e-3, seed=5)
        np.testing.assert_array_equal(first.points, second.points)
        assert np.max(np.abs(first.points - base.points)) <= 1e-3

    def test_zero_noise_returns_input(self):
        base = regular_polygon(8)
        assert add_vertex_noise(base, 0.0, seed=1) is base

    def test_negative_noise_rejected(self):
        with pytest.raises(InvalidParams, match="non-negative"):
            add_vertex_noise(regular_polygon(8), -1.0, seed=1)
