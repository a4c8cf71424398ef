"""
Constraint maps of the flow: logarithmic edge strain and barycenter.

The strain Σ_T(P)[I] = log(ℓ_P(I) / |I|) pins the speed of the
parametrization on every edge; its Jacobian B_T = DΣ_T(P) is sparse with
two n-blocks per row. The barycenter map C_T is linear and depends on the
partition only.

Degrees of freedom are ordered vertex-major, coordinate-minor: column
``v * n + i`` holds coordinate i of vertex v.
"""

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from .errors import DimensionMismatch
from .geometry.models import Partition, Polyline, unit_edge_vectors


class StrainVector(BaseModel):
    """Per-edge logarithmic strain log(ℓ_P(I) / |I|)."""

    values: np.ndarray = Field(description="One finite entry per edge")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __len__(self) -> int:
        return len(self.values)


class StrainJacobian(BaseModel):
    """
    Sparse N×(nN) Jacobian of the strain.

    Row I holds -τ_P(I)ᵀ/ℓ_P(I) in the columns of its lower vertex and
    +τ_P(I)ᵀ/ℓ_P(I) in the columns of its upper vertex.
    """

    matrix: sp.csr_matrix = Field(description="CSR matrix of shape (N, nN)")
    n: int = Field(ge=1, description="Ambient dimension")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.matrix.shape)  # type: ignore[return-value]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, field: np.ndarray) -> np.ndarray:
        flat = np.asarray(field, dtype=float).reshape(-1)
        if flat.size != self.matrix.shape[1]:
            raise DimensionMismatch(
                f"field with {flat.size} entries for a Jacobian with "
                f"{self.matrix.shape[1]} columns"
            )
        return self.matrix @ flat


class BarycenterJacobian(BaseModel):
    """Dense n×(nN) matrix C_T with C[i, v*n + i] = ½(|I_left(v)| + |I_right(v)|)."""

    matrix: np.ndarray = Field(description="Dense matrix of shape (n, nN)")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.matrix.shape)  # type: ignore[return-value]

    def apply(self, field: np.ndarray) -> np.ndarray:
        flat = np.asarray(field, dtype=float).reshape(-1)
        if flat.size != self.matrix.shape[1]:
            raise DimensionMismatch(
                f"field with {flat.size} entries for a Jacobian with "
                f"{self.matrix.shape[1]} columns"
            )
        return self.matrix @ flat


def log_strain(P: Polyline) -> StrainVector:
    """
    Σ_T(P) = log(ℓ_P(I) / |I|) per edge.

    Raises:
        DegenerateEdge: If an edge has zero length
    """
    P.require_regular()
    return StrainVector(values=np.log(P.edge_lengths / P.partition.edge_lengths))


def log_strain_jacobian(P: Polyline) -> StrainJacobian:
    """
    Assemble B_T = DΣ_T(P) with exactly 2nN stored entries.

    Raises:
        DegenerateEdge: If an edge has zero length
    """
    tangents = unit_edge_vectors(P)
    lengths = P.edge_lengths
    n_edges, dim = P.points.shape
    scaled = tangents / lengths[:, None]

    edges = np.arange(n_edges)
    coords = np.arange(dim)
    lower_cols = edges[:, None] * dim + coords[None, :]
    upper_cols = ((edges + 1) % n_edges)[:, None] * dim + coords[None, :]

    rows = np.repeat(edges, 2 * dim)
    cols = np.hstack([lower_cols, upper_cols]).reshape(-1)
    data = np.hstack([-scaled, scaled]).reshape(-1)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n_edges, n_edges * dim))
    return StrainJacobian(matrix=matrix, n=dim)


def barycenter_jacobian(T: Partition, n: int) -> BarycenterJacobian:
    """C_T as a dense n×(nN) matrix; rows sum to Σ|I| = 1."""
    weights = T.vertex_weights
    return BarycenterJacobian(matrix=np.kron(weights[None, :], np.eye(n)))


def constraint_violation(P: Polyline, reference: StrainVector) -> float:
    """‖Σ_T(P) - reference‖_∞."""
    if P.n_vertices != len(reference):
        raise DimensionMismatch(
            f"reference strain has {len(reference)} entries for N={P.n_vertices}"
        )
    return float(np.max(np.abs(log_strain(P).values - reference.values)))
