"""
Data models for closed polygonal curves.

This module provides the core data structures of MengerFlow: the partition of
the periodic parameter domain R/Z into edges, and the closed polyline that maps
the partition's vertices into R^n. Every other module (energy, metric,
constraints, flow) reads these two types and nothing else.

Key Classes:
    Partition: Ordered vertex parameters u_0 < ... < u_{N-1} on R/Z
    Polyline: Points P(v) in R^n attached to a Partition

Conventions:
    - Edge I_i runs from vertex i (its lower end) to vertex i+1 mod N (its
      upper end); the last edge wraps around through the parameter 1 == 0.
    - Degrees of freedom of a vertex field are ordered vertex-major,
      coordinate-minor: index ``v * n + i``.

Example:
    >>> import numpy as np
    >>> from mengerflow.geometry import Polyline, edge_length
    >>> square = Polyline.from_points(
    ...     np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    ... )
    >>> square.edge_lengths
    array([1., 1., 1., 1.])
    >>> edge_length(square, 0)
    1.0

Design Philosophy:
    - Immutable: arrays are copied and marked read-only on construction, and
      all transformations return new instances
    - Validation on construction: malformed partitions never exist
    - Regularity (positive edge lengths) is checked where a direction is
      needed, not on construction, so coincident vertices can be represented
"""

import hashlib
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DegenerateEdge, InvalidParams, PartitionMismatch


def _frozen_copy(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.flags.writeable = False
    return out


class Partition(BaseModel):
    """
    Subdivision of the periodic parameter domain R/Z into N edges.

    Attributes:
        vertex_params (np.ndarray): Strictly increasing parameters in [0, 1)

    Computed Properties:
        edge_lengths: |I_i| = u_{i+1} - u_i, the last one wrapping through 1
        param_midpoints: m(I_i) reduced mod 1

    Invariants:
        - N >= 3
        - all |I_i| > 0 and sum |I_i| == 1 up to rounding
    """

    vertex_params: np.ndarray = Field(description="Vertex parameters in [0, 1)")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def model_post_init(self, __context: Any) -> None:
        """Validate the parameters after initialization."""
        params = np.asarray(self.vertex_params, dtype=float)
        if params.ndim != 1:
            raise InvalidParams("vertex_params must be one-dimensional")
        if len(params) < 3:
            raise InvalidParams(
                f"A partition needs N >= 3 vertices, got {len(params)}"
            )
        if not np.all(np.isfinite(params)):
            raise InvalidParams("vertex_params contain NaN or infinity")
        if params[0] < 0.0 or params[-1] >= 1.0:
            raise InvalidParams("vertex_params must lie in [0, 1)")
        if not np.all(np.diff(params) > 0.0):
            raise InvalidParams("vertex_params must be strictly increasing")
        if params[0] + 1.0 - params[-1] <= 0.0:
            raise InvalidParams("wrapping edge has zero parameter length")
        object.__setattr__(self, "vertex_params", _frozen_copy(params))

    @classmethod
    def uniform(cls, n_edges: int) -> "Partition":
        """Uniform partition u_i = i/N, so that |I| = 1/N for every edge."""
        if n_edges < 3:
            raise InvalidParams(
                f"A partition needs N >= 3 vertices, got {n_edges}"
            )
        return cls(vertex_params=np.arange(n_edges, dtype=float) / n_edges)

    @property
    def n_edges(self) -> int:
        return len(self.vertex_params)

    @property
    def edge_lengths(self) -> np.ndarray:
        params = self.vertex_params
        lengths = np.empty(len(params))
        lengths[:-1] = np.diff(params)
        lengths[-1] = params[0] + 1.0 - params[-1]
        return lengths

    @property
    def param_midpoints(self) -> np.ndarray:
        return np.mod(self.vertex_params + 0.5 * self.edge_lengths, 1.0)

    @property
    def vertex_weights(self) -> np.ndarray:
        """Trapezoidal weights ½(|I_left(v)| + |I_right(v)|) per vertex."""
        lengths = self.edge_lengths
        return 0.5 * (lengths + np.roll(lengths, 1))

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.edge_lengths, 1.0 / self.n_edges, rtol=1e-12))

    def fingerprint(self) -> str:
        """Stable hash of the vertex parameters (identifies assembled matrices)."""
        raw = np.ascontiguousarray(self.vertex_params).tobytes()
        return hashlib.sha1(raw).hexdigest()

    def same_as(self, other: "Partition") -> bool:
        return self.n_edges == other.n_edges and bool(
            np.array_equal(self.vertex_params, other.vertex_params)
        )


class Polyline(BaseModel):
    """
    Closed polygonal curve P: V(T) -> R^n on a partition T.

    The polyline is identified with its periodic piecewise-linear
    interpolation; the point after vertex N-1 is vertex 0.

    Attributes:
        points (np.ndarray): Vertex positions, shape (N, n)
        partition (Partition): Parameter partition with N vertices

    Computed Properties:
        edge_vectors: P(upper I) - P(lower I) per edge, shape (N, n)
        edge_lengths: l_P(I) per edge
        spatial_midpoints: m_P(I) per edge, shape (N, n)

    Example:
        >>> poly = Polyline.from_points(np.eye(3))
        >>> shifted = poly.translated(np.array([1.0, 0.0, 0.0]))
        >>> np.allclose(shifted.edge_vectors, poly.edge_vectors)
        True
    """

    points: np.ndarray = Field(description="Vertex positions, shape (N, n)")
    partition: Partition = Field(description="Associated parameter partition")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def model_post_init(self, __context: Any) -> None:
        """Validate shapes after initialization."""
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2:
            raise InvalidParams(f"points must have shape (N, n), got {points.shape}")
        if points.shape[1] < 2:
            raise InvalidParams("ambient dimension must be at least 2")
        if points.shape[0] != self.partition.n_edges:
            raise PartitionMismatch(
                f"{points.shape[0]} points for a partition of "
                f"{self.partition.n_edges} vertices"
            )
        if not np.all(np.isfinite(points)):
            raise InvalidParams("points contain NaN or infinity")
        object.__setattr__(self, "points", _frozen_copy(points))

    @classmethod
    def from_points(
        cls, points: np.ndarray, partition: Partition | None = None
    ) -> "Polyline":
        """Create a polyline, defaulting to the uniform partition."""
        points = np.asarray(points, dtype=float)
        if partition is None:
            partition = Partition.uniform(len(points))
        return cls(points=points, partition=partition)

    @property
    def n_vertices(self) -> int:
        return int(self.points.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.points, -1, axis=0) - self.points

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors, axis=1)

    @property
    def spatial_midpoints(self) -> np.ndarray:
        return 0.5 * (self.points + np.roll(self.points, -1, axis=0))

    @property
    def is_regular(self) -> bool:
        return bool(np.all(self.edge_lengths > 0.0))

    def diameter(self) -> float:
        """Largest distance between two vertices."""
        from scipy.spatial.distance import pdist

        return float(np.max(pdist(self.points)))

    def require_regular(self) -> "Polyline":
        """Return self, or raise DegenerateEdge at the first zero-length edge."""
        lengths = self.edge_lengths
        zero = np.flatnonzero(lengths <= 0.0)
        if len(zero):
            first = int(zero[0])
            raise DegenerateEdge(f"edge {first} has zero length", edge=first)
        return self

    def with_points(self, points: np.ndarray) -> "Polyline":
        """New polyline on the same partition."""
        return self.__class__(points=points, partition=self.partition)

    def translated(self, offset: np.ndarray) -> "Polyline":
        return self.with_points(self.points + np.asarray(offset, dtype=float))

    def scaled(self, factor: float) -> "Polyline":
        return self.with_points(factor * self.points)

    def rotated(self, rotation: np.ndarray) -> "Polyline":
        """Apply an orthogonal matrix to every vertex."""
        return self.with_points(self.points @ np.asarray(rotation, dtype=float).T)


def _check_edge(P: Polyline, edge: int) -> int:
    if not 0 <= edge < P.n_vertices:
        raise InvalidParams(f"edge index {edge} out of range for N={P.n_vertices}")
    return int(edge)


def edge_length(P: Polyline, edge: int) -> float:
    """Return l_P(I) = |P(upper I) - P(lower I)|; zero is allowed here."""
    i = _check_edge(P, edge)
    j = (i + 1) % P.n_vertices
    return float(np.linalg.norm(P.points[j] - P.points[i]))


def unit_edge_vector(P: Polyline, edge: int) -> np.ndarray:
    """Return tau_P(I), raising DegenerateEdge for a zero-length edge."""
    i = _check_edge(P, edge)
    j = (i + 1) % P.n_vertices
    vector = P.points[j] - P.points[i]
    length = float(np.linalg.norm(vector))
    if length == 0.0:
        raise DegenerateEdge(f"edge {i} has zero length", edge=i)
    return vector / length


def unit_edge_vectors(P: Polyline) -> np.ndarray:
    """All unit edge vectors, shape (N, n)."""
    P.require_regular()
    vectors = P.edge_vectors
    return vectors / np.linalg.norm(vectors, axis=1)[:, None]


def midpoints(P: Polyline, edge: int) -> tuple[np.ndarray, float]:
    """Spatial midpoint m_P(I) and parameter midpoint m(I) mod 1 of an edge."""
    i = _check_edge(P, edge)
    j = (i + 1) % P.n_vertices
    spatial = 0.5 * (P.points[i] + P.points[j])
    return spatial, float(P.partition.param_midpoints[i])
