"""
Discrete Riesz isomorphism J_T of the fractional Sobolev metric.

The Gagliardo product of two vertex fields Φ, Ψ is discretized with the
midpoint rule on edge pairs:

    ⟨J_T Φ, Ψ⟩ = Σ_{I1 ≠ I2} ⟨Φ'(I1) - Φ'(I2), Ψ'(I1) - Ψ'(I2)⟩
                 · |I1| |I2| / |m(I1) - m(I2)|^{2s-1}

where Φ'(I) = (Φ(upper I) - Φ(lower I)) / |I| is the difference quotient
and |·| in the denominator is the periodic distance on R/Z. With the
difference-quotient matrix D and the weights W[I1, I2] this expands to the
N×N Gram block

    block = 2 Dᵀ (diag(W 1) - W) D

acting on one spatial component. The full (nN)×(nN) operator is
block ⊗ Id_n in the vertex-major, coordinate-minor ordering.

The block depends on the partition and on p only, so it can be assembled
once per run and reused for every step on the same partition.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .energy import EnergyParams
from .errors import DimensionMismatch, MidpointCoincidence
from .geometry.diagnostics import periodic_distance
from .geometry.models import Partition, Polyline

logger = logging.getLogger(__name__)


class GagliardoMatrix(BaseModel):
    """
    Assembled Gram block of the discrete Gagliardo product.

    Attributes:
        s (float): Differentiability order s = (3/2) p - 2
        block (np.ndarray): Symmetric N×N block for one spatial component
        n (int): Ambient dimension
        assembled_for (str): Fingerprint of the partition and exponent
    """

    s: float = Field(description="Differentiability order")
    block: np.ndarray = Field(description="N x N Gram block")
    n: int = Field(ge=1, description="Ambient dimension")
    assembled_for: str = Field(description="Partition fingerprint")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def exponent(self) -> float:
        """Kernel exponent 2s - 1 = 3p - 5."""
        return 2.0 * self.s - 1.0

    @property
    def n_vertices(self) -> int:
        return int(self.block.shape[0])

    def full(self) -> np.ndarray:
        """The (nN)×(nN) operator in vertex-major, coordinate-minor order."""
        return np.kron(self.block, np.eye(self.n))

    def apply(self, field: np.ndarray) -> np.ndarray:
        """J_T Φ for a field of shape (N, n), applied per spatial component."""
        field = _as_field(self, field)
        return self.block @ field

    def matches(self, partition: Partition, params: EnergyParams) -> bool:
        return self.assembled_for == _fingerprint(partition, params)


def _fingerprint(partition: Partition, params: EnergyParams) -> str:
    return f"{partition.fingerprint()}:p={params.p!r}"


def _as_field(J: GagliardoMatrix, field: np.ndarray) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.ndim == 1:
        if field.size != J.n_vertices * J.n:
            raise DimensionMismatch(
                f"vector of size {field.size} for {J.n_vertices} vertices in R^{J.n}"
            )
        return field.reshape(J.n_vertices, J.n)
    if field.shape != (J.n_vertices, J.n):
        raise DimensionMismatch(
            f"field of shape {field.shape}, expected {(J.n_vertices, J.n)}"
        )
    return field


def difference_quotient_matrix(partition: Partition) -> np.ndarray:
    """D with (DΦ)[I] = (Φ(upper I) - Φ(lower I)) / |I|, shape (N, N)."""
    n_edges = partition.n_edges
    lengths = partition.edge_lengths
    rows = np.arange(n_edges)
    D = np.zeros((n_edges, n_edges))
    D[rows, rows] = -1.0 / lengths
    D[rows, (rows + 1) % n_edges] += 1.0 / lengths
    return D


def gagliardo_weights(partition: Partition, exponent: float) -> np.ndarray:
    """W[I1, I2] = |I1| |I2| / |m(I1) - m(I2)|_{R/Z}^exponent, zero diagonal."""
    mids = partition.param_midpoints
    lengths = partition.edge_lengths
    distance = periodic_distance(mids[:, None], mids[None, :])
    off_diagonal = ~np.eye(len(mids), dtype=bool)
    if np.any(distance[off_diagonal] <= 0.0):
        i, j = np.argwhere((distance <= 0.0) & off_diagonal)[0]
        raise MidpointCoincidence(f"edges {i} and {j} share a parameter midpoint")
    safe = np.where(off_diagonal, distance, 1.0)
    return np.where(off_diagonal, np.outer(lengths, lengths) / safe**exponent, 0.0)


def assemble_gagliardo(
    P: Polyline | Partition, params: EnergyParams, n: int = 3
) -> GagliardoMatrix:
    """
    Assemble the Gram block of the discrete Gagliardo product.

    Args:
        P: Polyline (its partition and ambient dimension are used) or a bare
            partition together with ``n``
        params: Energy parameters; fixes s = (3/2) p - 2
        n: Ambient dimension when a partition is passed

    Returns:
        GagliardoMatrix: Symmetric positive semidefinite block whose kernel
        is the constant fields

    Raises:
        MidpointCoincidence: If two edges share a parameter midpoint
    """
    if isinstance(P, Polyline):
        partition = P.partition
        n = P.ambient_dim
    else:
        partition = P
    s = params.sobolev_order
    exponent = 2.0 * s - 1.0
    D = difference_quotient_matrix(partition)
    W = gagliardo_weights(partition, exponent)
    laplacian = np.diag(W.sum(axis=1)) - W
    block = 2.0 * D.T @ laplacian @ D
    block = 0.5 * (block + block.T)
    logger.debug(
        "assembled %dx%d Gagliardo block (s=%.4f, exponent=%.4f)",
        partition.n_edges,
        partition.n_edges,
        s,
        exponent,
    )
    return GagliardoMatrix(
        s=s, block=block, n=n, assembled_for=_fingerprint(partition, params)
    )


def gagliardo_product(J: GagliardoMatrix, phi: np.ndarray, psi: np.ndarray) -> float:
    """⟨J_T Φ, Ψ⟩ for vertex fields of shape (N, n) or vectors of length nN."""
    phi = _as_field(J, phi)
    psi = _as_field(J, psi)
    return float(np.sum((J.block @ phi) * psi))


def discrete_seminorm(J: GagliardoMatrix, phi: np.ndarray) -> float:
    """√⟨J_T Φ, Φ⟩, the discrete fractional seminorm of Φ'."""
    return float(np.sqrt(max(gagliardo_product(J, phi, phi), 0.0)))
