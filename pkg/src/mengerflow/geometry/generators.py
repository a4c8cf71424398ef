"""
Initial curves for the flow.

Generators:
    generate_torus_knot: (a, b) torus knot sampled at t = i/N
    regular_polygon: Regular N-gon in the first coordinate plane
    generate_square_knot: Trefoil joined to its mirror image, resampled to
        N vertices of equal edge length
    add_vertex_noise: Seeded uniform vertex perturbation

All generators return polylines on the uniform partition. Noise is drawn from
``numpy.random.default_rng(seed)`` (PCG64), so a seed reproduces the same
curve on every platform.
"""

import math

import numpy as np

from ..errors import InvalidParams
from .models import Polyline


def generate_torus_knot(
    a: int, b: int, n_edges: int, R: float = 2.0, r: float = 1.0
) -> Polyline:
    """
    Sample the (a, b) torus knot on the uniform partition.

    Vertex i sits at ((R + r cos 2πbt) cos 2πat, (R + r cos 2πbt) sin 2πat,
    r sin 2πbt) with t = i/N. ``b = 0`` gives the planar circle of radius R + r.

    Args:
        a: Number of turns around the torus axis
        b: Number of turns through the torus hole
        n_edges: Number of vertices N (>= 3)
        R: Distance from the torus center to the tube center
        r: Tube radius, 0 < r < R

    Returns:
        Polyline: Regular polyline in R^3

    Raises:
        InvalidParams: If gcd(a, b) != 1, N < 3 or the radii are inconsistent

    Example:
        >>> trefoil = generate_torus_knot(2, 3, 48)
        >>> trefoil.points.shape
        (48, 3)
    """
    if math.gcd(a, b) != 1:
        raise InvalidParams(f"torus knot needs gcd(a, b) = 1, got a={a}, b={b}")
    if n_edges < 3:
        raise InvalidParams(f"A polyline needs N >= 3 vertices, got {n_edges}")
    if not R > r > 0.0:
        raise InvalidParams(f"torus radii must satisfy R > r > 0, got R={R}, r={r}")

    t = 2.0 * np.pi * np.arange(n_edges) / n_edges
    radial = R + r * np.cos(b * t)
    points = np.column_stack(
        [radial * np.cos(a * t), radial * np.sin(a * t), r * np.sin(b * t)]
    )
    return Polyline.from_points(points)


def regular_polygon(
    n_edges: int, radius: float = 1.0, ambient_dim: int = 3
) -> Polyline:
    """Regular N-gon of circumradius ``radius`` centered at the origin."""
    if n_edges < 3:
        raise InvalidParams(f"A polyline needs N >= 3 vertices, got {n_edges}")
    if radius <= 0.0:
        raise InvalidParams(f"radius must be positive, got {radius}")
    if ambient_dim < 2:
        raise InvalidParams("ambient dimension must be at least 2")
    t = 2.0 * np.pi * np.arange(n_edges) / n_edges
    points = np.zeros((n_edges, ambient_dim))
    points[:, 0] = radius * np.cos(t)
    points[:, 1] = radius * np.sin(t)
    return Polyline.from_points(points)


def _trefoil_arc(t: np.ndarray) -> np.ndarray:
    return np.column_stack(
        [
            (2.0 + np.cos(3.0 * t)) * np.cos(2.0 * t),
            (2.0 + np.cos(3.0 * t)) * np.sin(2.0 * t),
            np.sin(3.0 * t),
        ]
    )


def _resample_closed(points: np.ndarray, n_edges: int) -> np.ndarray:
    """Place N vertices at equal arc-length spacing along a dense closed loop."""
    closed = np.vstack([points, points[:1]])
    segment = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    arclength = np.concatenate([[0.0], np.cumsum(segment)])
    targets = np.arange(n_edges) * arclength[-1] / n_edges
    return np.column_stack(
        [np.interp(targets, arclength, closed[:, k]) for k in range(closed.shape[1])]
    )


def generate_square_knot(
    n_edges: int, scale: float = 1.0, gap: float = 0.15, density: int = 4000
) -> Polyline:
    """
    Square knot: connected sum of a trefoil and its mirror image.

    A trefoil arc is opened near its outermost point (parameters within
    ``gap`` of 0 are removed), a copy mirrored in the x-direction is placed
    opposite the opening, and two straight bridges at constant y and z join
    the four loose ends. The resulting loop is resampled to N vertices at
    equal arc length, centered at the origin and scaled by ``scale``.

    Args:
        n_edges: Number of vertices N (>= 3)
        scale: Uniform scale factor applied after centering
        gap: Half-width of the parameter window cut out of each trefoil
        density: Number of dense samples per trefoil arc before resampling

    Returns:
        Polyline: Nearly equilateral polyline in R^3
    """
    if n_edges < 3:
        raise InvalidParams(f"A polyline needs N >= 3 vertices, got {n_edges}")
    if not 0.0 < gap < 0.5:
        raise InvalidParams(f"gap must lie in (0, 0.5), got {gap}")
    if scale <= 0.0:
        raise InvalidParams(f"scale must be positive, got {scale}")

    t = np.linspace(gap, 2.0 * np.pi - gap, density)
    left = _trefoil_arc(t)
    offset = 2.0 * left[0, 0] + 1.0
    right = _trefoil_arc(t[::-1])
    right[:, 0] = offset - right[:, 0]

    bridge_t = np.linspace(0.0, 1.0, max(density // 20, 2))[1:-1, None]
    lower_bridge = left[-1] + bridge_t * (right[0] - left[-1])
    upper_bridge = right[-1] + bridge_t * (left[0] - right[-1])

    loop = np.vstack([left, lower_bridge, right, upper_bridge])
    points = _resample_closed(loop, n_edges)
    points -= points.mean(axis=0)
    return Polyline.from_points(scale * points)


def add_vertex_noise(P: Polyline, amplitude: float, seed: int) -> Polyline:
    """
    Perturb every vertex coordinate by an independent U(-amplitude, amplitude).

    Args:
        P: Polyline to perturb
        amplitude: Half-width of the uniform distribution (>= 0)
        seed: Seed for ``numpy.random.default_rng``

    Returns:
        Polyline: Perturbed copy on the same partition (P itself if amplitude is 0)
    """
    if amplitude < 0.0:
        raise InvalidParams(f"noise amplitude must be non-negative, got {amplitude}")
    if amplitude == 0.0:
        return P
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=P.points.shape)
    return P.with_points(P.points + noise)
