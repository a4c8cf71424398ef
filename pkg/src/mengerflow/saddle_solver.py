"""
Saddle point (KKT) system of the projected gradient.

The matrix

    A_T(P) = [ J   Bᵀ  Cᵀ ]
             [ B   0   0  ]
             [ C   0   0  ]

couples the Gagliardo operator J (expanded to (nN)×(nN)), the strain
Jacobian B (N×nN) and the barycenter map C (n×nN). Its dimension is
(n+1)N + n. The unknowns are ordered as the primal vertex field
(vertex-major, coordinate-minor), then the N edge multipliers λ, then the n
barycenter multipliers μ.

One dense LU factorization with partial pivoting serves the projected
gradient solve and every restoration solve of a step.

Example:
    >>> system = factorize(assemble_saddle(J, B, C))
    >>> g, lam, mu = solve_projected_gradient(system, report.flat)
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import lu_factor, lu_solve

from .constraints import BarycenterJacobian, StrainJacobian, StrainVector
from .errors import DimensionMismatch, SingularSystem
from .sobolev_metric import GagliardoMatrix

logger = logging.getLogger(__name__)


class SaddleSystem(BaseModel):
    """
    Assembled saddle point matrix with its (optional) LU factorization.

    Instances are frozen and the matrix is read-only, so one factorized
    system can serve concurrent solves from several threads.

    Attributes:
        n_vertices (int): N
        n (int): Ambient dimension
        matrix (np.ndarray): Dense symmetric indefinite matrix
        factorization: LU factors and pivots from ``scipy.linalg.lu_factor``
        base_point_fingerprint (str): Identifies the polyline P(t) the
            strain block was built at
        factorization_count (int): Number of factorizations performed
    """

    n_vertices: int = Field(ge=3)
    n: int = Field(ge=1)
    matrix: np.ndarray
    factorization: tuple[np.ndarray, np.ndarray] | None = None
    base_point_fingerprint: str = ""
    factorization_count: int = 0

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def dimension(self) -> int:
        return (self.n + 1) * self.n_vertices + self.n

    @property
    def primal_size(self) -> int:
        return self.n * self.n_vertices

    @property
    def is_factorized(self) -> bool:
        return self.factorization is not None

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split a solution into (vertex field (N, n), λ (N,), μ (n,))."""
        nN = self.primal_size
        field = x[:nN].reshape(self.n_vertices, self.n)
        return field, x[nN : nN + self.n_vertices], x[nN + self.n_vertices :]

    def residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Relative residual ‖A x - b‖ / ‖b‖ (absolute when b = 0)."""
        r = float(np.linalg.norm(self.matrix @ x - rhs))
        scale = float(np.linalg.norm(rhs))
        return r / scale if scale > 0.0 else r


def assemble_saddle(
    J: GagliardoMatrix,
    B: StrainJacobian,
    C: BarycenterJacobian,
    base_point_fingerprint: str = "",
) -> SaddleSystem:
    """
    Lay out [J Bᵀ Cᵀ; B 0 0; C 0 0] as a dense matrix.

    Raises:
        DimensionMismatch: If the three blocks disagree on N or n
    """
    n_vertices = J.n_vertices
    n = J.n
    nN = n_vertices * n
    if B.shape != (n_vertices, nN):
        raise DimensionMismatch(
            f"strain Jacobian of shape {B.shape}, expected {(n_vertices, nN)}"
        )
    if C.shape != (n, nN):
        raise DimensionMismatch(
            f"barycenter Jacobian of shape {C.shape}, expected {(n, nN)}"
        )

    dim = (n + 1) * n_vertices + n
    A = np.zeros((dim, dim))
    B_dense = B.dense()
    A[:nN, :nN] = J.full()
    A[:nN, nN : nN + n_vertices] = B_dense.T
    A[:nN, nN + n_vertices :] = C.matrix.T
    A[nN : nN + n_vertices, :nN] = B_dense
    A[nN + n_vertices :, :nN] = C.matrix
    A.setflags(write=False)
    return SaddleSystem(
        n_vertices=n_vertices,
        n=n,
        matrix=A,
        base_point_fingerprint=base_point_fingerprint,
    )


def factorize(system: SaddleSystem) -> SaddleSystem:
    """
    LU-factorize the saddle matrix.

    Returns a new system carrying the factors; the input is left untouched.
    A system that already carries a factorization is returned as is.

    Raises:
        SingularSystem: If a pivot of U is negligible relative to the largest
            pivot; the pivot ratio is reported as the condition estimate
    """
    if system.factorization is not None:
        return system
    lu, piv = lu_factor(system.matrix, check_finite=True)
    pivots = np.abs(np.diag(lu))
    largest = float(pivots.max()) if pivots.size else 0.0
    smallest = float(pivots.min()) if pivots.size else 0.0
    threshold = np.finfo(float).eps * largest * system.dimension
    if largest == 0.0 or smallest <= threshold:
        estimate = largest / smallest if smallest > 0.0 else float("inf")
        raise SingularSystem(
            f"saddle matrix of dimension {system.dimension} is rank deficient",
            condition_estimate=estimate,
        )
    logger.debug(
        "factorized saddle system of dimension %d (pivot ratio %.3e)",
        system.dimension,
        largest / smallest,
    )
    return system.model_copy(
        update={
            "factorization": (lu, piv),
            "factorization_count": system.factorization_count + 1,
        }
    )


def _solve(system: SaddleSystem, rhs: np.ndarray) -> np.ndarray:
    if system.factorization is None:
        raise SingularSystem("saddle system has not been factorized")
    return np.asarray(lu_solve(system.factorization, rhs))


def solve_projected_gradient(
    system: SaddleSystem, dE: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve A (g, λ, μ) = (DE, 0, 0) for the projected gradient g.

    Args:
        system: Factorized saddle system at P(t)
        dE: Energy differential, shape (N, n) or flat of length nN

    Returns:
        Tuple of g (N, n), λ (N,), μ (n,)
    """
    flat = np.asarray(dE, dtype=float).reshape(-1)
    if flat.size != system.primal_size:
        raise DimensionMismatch(
            f"differential with {flat.size} entries, expected {system.primal_size}"
        )
    rhs = np.zeros(system.dimension)
    rhs[: system.primal_size] = flat
    return system.split(_solve(system, rhs))


def solve_restoration(
    system: SaddleSystem, violation: StrainVector | np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve A (v, λ, μ) = (0, violation, 0) with the matrix frozen at P(t).

    Args:
        system: Factorized saddle system at P(t)
        violation: Σ_T(Q_k) - reference strain

    Returns:
        Tuple of the update v (N, n), λ (N,), μ (n,)
    """
    values = violation.values if isinstance(violation, StrainVector) else violation
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size != system.n_vertices:
        raise DimensionMismatch(
            f"violation with {values.size} entries, expected {system.n_vertices}"
        )
    rhs = np.zeros(system.dimension)
    rhs[system.primal_size : system.primal_size + system.n_vertices] = values
    return system.split(_solve(system, rhs))
