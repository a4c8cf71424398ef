"""Polygonal curve geometry: data model, diagnostics and generators."""

from .diagnostics import (
    GeometryDiagnostics,
    barycenter,
    bilipschitz_constant,
    geometry_diagnostics,
    is_embedded,
    non_adjacent_pairs,
    periodic_distance,
    segment_distances,
    self_intersection_distance,
    tangent_lipschitz_constant,
    theta_eigenvalue_lower_bound,
    theta_matrix,
    theta_min_eigenvalue,
    turning_angles,
)
from .generators import (
    add_vertex_noise,
    generate_square_knot,
    generate_torus_knot,
    regular_polygon,
)
from .models import (
    Partition,
    Polyline,
    edge_length,
    midpoints,
    unit_edge_vector,
    unit_edge_vectors,
)

__all__ = [
    # Data model
    "Partition",
    "Polyline",
    "edge_length",
    "unit_edge_vector",
    "unit_edge_vectors",
    "midpoints",
    # Diagnostics
    "GeometryDiagnostics",
    "geometry_diagnostics",
    "periodic_distance",
    "bilipschitz_constant",
    "turning_angles",
    "barycenter",
    "theta_matrix",
    "theta_min_eigenvalue",
    "tangent_lipschitz_constant",
    "theta_eigenvalue_lower_bound",
    "segment_distances",
    "non_adjacent_pairs",
    "self_intersection_distance",
    "is_embedded",
    # Generators
    "generate_torus_knot",
    "regular_polygon",
    "generate_square_knot",
    "add_vertex_noise",
]
