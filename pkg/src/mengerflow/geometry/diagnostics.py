"""
Geometric diagnostics for closed polylines.

Quantities that describe how far a polyline is from degenerating: the
discrete bilipschitz constant, turning angles, the smallest eigenvalue of the
tangent-spread matrix Theta, and static segment-segment distances. None of
them enter the flow itself; they are reported by ``mengerflow diagnose`` and
used as pre- and post-checks of a run.

Functions:
    periodic_distance: Distance on R/Z
    bilipschitz_constant: min |P(u)-P(v)| / |u-v|_{R/Z} over vertex pairs
    turning_angles: Angle between consecutive unit edge vectors
    barycenter: Trapezoidal average of the curve
    theta_matrix / theta_min_eigenvalue: Sum_I (Id - tau tau^T) |I|
    tangent_lipschitz_constant / theta_eigenvalue_lower_bound: the matching
        lower bound for lambda_min(Theta)
    segment_distances / self_intersection_distance / is_embedded: static
        embeddedness checks
    geometry_diagnostics: All of the above in one report
"""

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.distance import pdist

from .models import Polyline, unit_edge_vectors

_EPS = np.finfo(float).eps


class GeometryDiagnostics(BaseModel):
    """
    Summary of embeddedness and regularity indicators for one polyline.

    Attributes:
        bilipschitz (float): Discrete bilipschitz constant (vertex pairs)
        min_edge_length (float): Shortest edge
        max_edge_length (float): Longest edge
        max_turning_angle (float): Largest turning angle in radians
        total_length (float): Sum of edge lengths
        barycenter (list[float]): Trapezoidal barycenter
        theta_min_eigenvalue (float): Smallest eigenvalue of Theta_P
    """

    bilipschitz: float = Field(ge=0.0, description="Discrete bilipschitz constant")
    min_edge_length: float = Field(ge=0.0, description="Shortest edge length")
    max_edge_length: float = Field(ge=0.0, description="Longest edge length")
    max_turning_angle: float = Field(ge=0.0, description="Largest turning angle")
    total_length: float = Field(ge=0.0, description="Total curve length")
    barycenter: list[float] = Field(description="Trapezoidal barycenter")
    theta_min_eigenvalue: float = Field(ge=0.0, description="lambda_min(Theta_P)")


def periodic_distance(u: np.ndarray | float, v: np.ndarray | float) -> np.ndarray:
    """|u - v|_{R/Z}, always in [0, 1/2]."""
    d = np.mod(np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float)), 1.0)
    return np.minimum(d, 1.0 - d)


def bilipschitz_constant(P: Polyline) -> float:
    """
    Minimum chord-to-parameter-distance quotient over distinct vertex pairs.

    This is a vertex-pair surrogate (an upper bound) for the continuum
    infimum; closest approach between edge interiors is not examined.
    """
    chords = pdist(P.points)
    params = pdist(P.partition.vertex_params[:, None])
    params = np.minimum(params, 1.0 - params)
    return float(np.min(chords / params))


def turning_angles(P: Polyline) -> np.ndarray:
    """Angle at vertex v_i between tau(I_{i-1}) and tau(I_i), in [0, pi]."""
    tangents = unit_edge_vectors(P)
    cosines = np.sum(np.roll(tangents, 1, axis=0) * tangents, axis=1)
    return np.arccos(np.clip(cosines, -1.0, 1.0))


def barycenter(P: Polyline) -> np.ndarray:
    """½ Σ_I (P(lower I) + P(upper I)) |I|."""
    weights = P.partition.vertex_weights
    return weights @ P.points


def theta_matrix(P: Polyline) -> np.ndarray:
    tangents = unit_edge_vectors(P)
    lengths = P.partition.edge_lengths
    spread = (tangents * lengths[:, None]).T @ tangents
    return np.eye(P.ambient_dim) * lengths.sum() - spread


def theta_min_eigenvalue(P: Polyline) -> float:
    """Smallest eigenvalue of Θ_P = Σ_I (Id - τ_P(I) τ_P(I)^T) |I|, in [0, 1]."""
    eigenvalues = np.linalg.eigvalsh(theta_matrix(P))
    return float(np.clip(eigenvalues[0], 0.0, 1.0))


def tangent_lipschitz_constant(P: Polyline) -> float:
    """
    Discrete Lipschitz constant of the unit tangent in the angular metric.

    Tangents are attached to the parameter midpoints of their edges; the
    constant is the largest angle between two tangents divided by the
    periodic distance of their midpoints.
    """
    tangents = unit_edge_vectors(P)
    angles = np.arccos(np.clip(1.0 - pdist(tangents, "cosine"), -1.0, 1.0))
    params = pdist(P.partition.param_midpoints[:, None])
    params = np.minimum(params, 1.0 - params)
    return float(np.max(angles / params))


def theta_eigenvalue_lower_bound(holder_constant: float, alpha: float = 1.0) -> float:
    """Lower bound π²/(2+1/α)² · (π/((2+4α) C))^{1/α} on λ_min(Θ).

    Holds for a curve whose unit tangent is α-Hölder with constant C.
    """
    return float(
        np.pi**2
        / (2.0 + 1.0 / alpha) ** 2
        * (np.pi / ((2.0 + 4.0 * alpha) * holder_constant)) ** (1.0 / alpha)
    )


def segment_distances(
    a0: np.ndarray, a1: np.ndarray, b0: np.ndarray, b1: np.ndarray
) -> np.ndarray:
    """
    Distance between segments [a0, a1] and [b0, b1], broadcast over leading axes.

    Closest points are found by clamping the unconstrained line-line solution
    to the unit square, handling point-like and parallel segments separately.
    """
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)

    scale = np.maximum(a, e)
    a_point = a <= _EPS * scale
    e_point = e <= _EPS * scale
    safe_a = np.where(a_point, 1.0, a)
    safe_e = np.where(e_point, 1.0, e)

    denom = a * e - b * b
    parallel = denom <= 1e-14 * a * e
    safe_denom = np.where(parallel, 1.0, denom)
    s = np.where(parallel, 0.0, np.clip((b * f - c * e) / safe_denom, 0.0, 1.0))
    t = (b * s + f) / safe_e
    s = np.where(t < 0.0, np.clip(-c / safe_a, 0.0, 1.0), s)
    s = np.where(t > 1.0, np.clip((b - c) / safe_a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)

    # degenerate segments: one or both reduce to a point
    t = np.where(a_point, np.clip(f / safe_e, 0.0, 1.0), t)
    s = np.where(a_point, 0.0, s)
    s = np.where(e_point & ~a_point, np.clip(-c / safe_a, 0.0, 1.0), s)
    t = np.where(e_point, 0.0, t)

    closest_a = a0 + s[..., None] * d1
    closest_b = b0 + t[..., None] * d2
    return np.linalg.norm(closest_a - closest_b, axis=-1)


def non_adjacent_pairs(n_edges: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (i, j), i < j, of edges that share no vertex."""
    i, j = np.triu_indices(n_edges, k=2)
    keep = ~((i == 0) & (j == n_edges - 1))
    return i[keep], j[keep]


def self_intersection_distance(P: Polyline) -> float:
    """Smallest distance between two edges that share no vertex."""
    i, j = non_adjacent_pairs(P.n_vertices)
    if len(i) == 0:
        return float("inf")
    pts = P.points
    nxt = np.roll(pts, -1, axis=0)
    return float(np.min(segment_distances(pts[i], nxt[i], pts[j], nxt[j])))


def is_embedded(P: Polyline, rel_tol: float = 1e-9) -> bool:
    """True when the polyline is regular and non-adjacent edges stay apart."""
    if not P.is_regular:
        return False
    if np.any(turning_angles(P) >= np.pi - 1e-12):
        return False
    return self_intersection_distance(P) > rel_tol * P.diameter()


def geometry_diagnostics(P: Polyline) -> GeometryDiagnostics:
    """Collect all diagnostics of a regular polyline."""
    lengths = P.edge_lengths
    return GeometryDiagnostics(
        bilipschitz=bilipschitz_constant(P),
        min_edge_length=float(lengths.min()),
        max_edge_length=float(lengths.max()),
        max_turning_angle=float(turning_angles(P).max()),
        total_length=float(lengths.sum()),
        barycenter=barycenter(P).tolist(),
        theta_min_eigenvalue=theta_min_eigenvalue(P),
    )
