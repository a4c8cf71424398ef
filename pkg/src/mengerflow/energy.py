"""
Discrete generalized integral Menger energy and its differential.

The energy of a polyline P on a partition T is the midpoint-rule
discretization of the triple integral of 1/R^{(p,q)}:

    E_T(P) = Σ_{I1, I2, I3 distinct} W_P(I1, I2, I3)
    W_P    = ℓ_P(I1) ℓ_P(I2) ℓ_P(I3) · K(m_P(I1), m_P(I2), m_P(I3))

with the kernel

    K(x, y, z) = |(y - x) ∧ (z - x)|^q / (|x - y| |y - z| |z - x|)^p.

Since W_P is symmetric in its three arguments, the sum runs over unordered
triples i < j < k and is multiplied by 6.

Key Components:
    EnergyParams: Exponents and the collision guard
    EnergyReport: Energy value, differential and triple count
    kernel_rpq_inverse: Kernel of a single point triple
    local_contribution: W_P of one edge triple
    total_energy / energy_differential: Full O(N³) sums
    finite_difference_differential: Central-difference oracle

Evaluation Strategy:
    The triple sum is split by its smallest index i. For each i the pairs
    i < j < k are evaluated as one vectorized batch, and the per-i partial
    results are accumulated in increasing i. Batches may be computed by a
    thread pool (``EnergyParams.workers``); the fixed accumulation order makes
    the result bit-identical for any worker count.

Example:
    >>> from mengerflow.geometry import generate_torus_knot
    >>> trefoil = generate_torus_knot(2, 3, 24)
    >>> report = energy_differential(trefoil, EnergyParams(p=2.5))
    >>> report.differential.shape
    (24, 3)
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.distance import pdist

from .errors import InvalidParams, MidpointCollision, NonDistinctEdges
from .geometry.models import Polyline, unit_edge_vectors

logger = logging.getLogger(__name__)

P_MIN = 7.0 / 3.0
P_MAX = 8.0 / 3.0


class EnergyParams(BaseModel):
    """
    Parameters of the discrete Menger energy.

    Attributes:
        p (float): Distance exponent, 7/3 < p < 8/3 (default 2.5)
        q (float): Wedge exponent, fixed at 2
        degenerate_threshold (float): Collision guard relative to the curve
            diameter (default 1e-12)
        allow_outside_range (bool): Accept p outside (7/3, 8/3)
        workers (int): Threads used for the triple sum (default 1)
    """

    p: float = Field(2.5, gt=0.0, description="Distance exponent")
    q: float = Field(2.0, description="Wedge exponent (Hilbert case q = 2)")
    degenerate_threshold: float = Field(
        1e-12, gt=0.0, description="Relative midpoint collision guard"
    )
    allow_outside_range: bool = Field(
        False, description="Permit p outside the interval (7/3, 8/3)"
    )
    workers: int = Field(1, ge=1, description="Worker threads for the triple sum")

    @field_validator("q")
    @classmethod
    def validate_q(cls, v: float) -> float:
        if v != 2.0:
            raise ValueError(f"only q = 2 is supported, got q={v}")
        return v

    @model_validator(mode="after")
    def validate_p_range(self) -> "EnergyParams":
        if not self.allow_outside_range and not P_MIN < self.p < P_MAX:
            raise ValueError(
                f"p must lie in (7/3, 8/3), got p={self.p}; "
                "set allow_outside_range to experiment outside this range"
            )
        return self

    @property
    def sobolev_order(self) -> float:
        """Differentiability order s = (3/2) p - 2 of the energy space."""
        return 1.5 * self.p - 2.0

    @property
    def homogeneity_degree(self) -> float:
        """E(μP) = μ^(7 - 3p) E(P)."""
        return 7.0 - 3.0 * self.p


class EnergyReport(BaseModel):
    """
    Energy value together with its differential in the vertex basis.

    Attributes:
        value (float): E_T(P) >= 0
        differential (np.ndarray): DE_T(P), shape (N, n); row v holds the
            partials with respect to the coordinates of vertex v
        triple_count (int): Number of unordered triples summed
    """

    value: float = Field(ge=0.0, description="Energy value")
    differential: np.ndarray = Field(description="Differential, shape (N, n)")
    triple_count: int = Field(ge=0, description="Unordered triples evaluated")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def flat(self) -> np.ndarray:
        """Differential as a vertex-major vector of length n·N."""
        return self.differential.reshape(-1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.differential))


def kernel_rpq_inverse(
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    params: EnergyParams,
    scale: float = 1.0,
) -> float:
    """
    Evaluate 1/R^{(p,q)}(x, y, z) = |(y-x)∧(z-x)|^q / (|x-y| |y-z| |z-x|)^p.

    The circumradius of x, y, z is R = |x-y| |y-z| |z-x| / (2 |(y-x)∧(z-x)|),
    so (1/R)^p = 2^p |(y-x)∧(z-x)|^p / (|x-y| |y-z| |z-x|)^p. Dividing out
    2^p gives the (p, p) kernel; decoupling the two exponents gives the form
    above. The wedge norm is taken from the Gram determinant
    |u|²|v|² - (u·v)², which is valid in every dimension.

    Args:
        x, y, z: Points in R^n
        params: Energy parameters
        scale: Length scale multiplying ``params.degenerate_threshold``

    Returns:
        float: Kernel value, 0 for collinear distinct points

    Raises:
        MidpointCollision: If two of the points are closer than the guard
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    u = y - x
    v = z - x
    d_xy = float(np.linalg.norm(u))
    d_zx = float(np.linalg.norm(v))
    d_yz = float(np.linalg.norm(z - y))
    guard = params.degenerate_threshold * scale
    if min(d_xy, d_yz, d_zx) < guard:
        raise MidpointCollision(
            f"points closer than {guard:.3e}: distances "
            f"{d_xy:.3e}, {d_yz:.3e}, {d_zx:.3e}"
        )
    area_sq = max(float(u @ u) * float(v @ v) - float(u @ v) ** 2, 0.0)
    return area_sq ** (params.q / 2.0) / (d_xy * d_yz * d_zx) ** params.p


def _check_midpoint_collisions(midpoints: np.ndarray, guard: float) -> None:
    distances = pdist(midpoints)
    if len(distances) and float(distances.min()) < guard:
        flat = int(np.argmin(distances))
        i, j = _condensed_to_pair(flat, len(midpoints))
        raise MidpointCollision(
            f"midpoints of edges {i} and {j} are {distances[flat]:.3e} apart "
            f"(guard {guard:.3e})"
        )


def _condensed_to_pair(index: int, n: int) -> tuple[int, int]:
    rows, cols = np.triu_indices(n, k=1)
    return int(rows[index]), int(cols[index])


def local_contribution(
    P: Polyline, I1: int, I2: int, I3: int, params: EnergyParams
) -> float:
    """
    W_P(I1, I2, I3) = ℓ(I1) ℓ(I2) ℓ(I3) · K(m(I1), m(I2), m(I3)).

    The indices are sorted before evaluation, so all six permutations return
    the same float.

    Raises:
        NonDistinctEdges: If an edge index repeats
        MidpointCollision: If two of the midpoints collide
    """
    if len({I1, I2, I3}) != 3:
        raise NonDistinctEdges(f"edge triple ({I1}, {I2}, {I3}) repeats an index")
    for edge in (I1, I2, I3):
        if not 0 <= edge < P.n_vertices:
            raise InvalidParams(f"edge index {edge} out of range for N={P.n_vertices}")
    i, j, k = sorted((I1, I2, I3))
    lengths = P.edge_lengths
    mids = P.spatial_midpoints
    kernel = kernel_rpq_inverse(
        mids[i], mids[j], mids[k], params, scale=P.diameter()
    )
    return float(lengths[i] * lengths[j] * lengths[k] * kernel)


def _pairs_after(i: int, n_edges: int) -> tuple[np.ndarray, np.ndarray]:
    """All (j, k) with i < j < k < N."""
    j, k = np.triu_indices(n_edges - i - 1, k=1)
    return j + i + 1, k + i + 1


def _batch_energy(
    i: int, mids: np.ndarray, lengths: np.ndarray, params: EnergyParams
) -> float:
    j, k = _pairs_after(i, len(lengths))
    u = mids[j] - mids[i]
    v = mids[k] - mids[i]
    w = mids[k] - mids[j]
    uu = np.einsum("ij,ij->i", u, u)
    vv = np.einsum("ij,ij->i", v, v)
    ww = np.einsum("ij,ij->i", w, w)
    uv = np.einsum("ij,ij->i", u, v)
    area_sq = np.maximum(uu * vv - uv * uv, 0.0)
    denom = np.sqrt(uu * vv * ww) ** params.p
    kernel = area_sq ** (params.q / 2.0) / denom
    return float(lengths[i] * np.sum(lengths[j] * lengths[k] * kernel))


def _batch_differential(
    i: int,
    mids: np.ndarray,
    lengths: np.ndarray,
    tangents: np.ndarray,
    params: EnergyParams,
) -> tuple[float, np.ndarray]:
    """Energy and vertex gradient of Σ_{i<j<k} W_P(I_i, I_j, I_k) for fixed i."""
    n_edges, dim = mids.shape
    p = params.p
    j, k = _pairs_after(i, n_edges)
    a = mids[i]
    b = mids[j]
    c = mids[k]

    u = b - a
    v = c - a
    w = c - b
    uu = np.einsum("ij,ij->i", u, u)
    vv = np.einsum("ij,ij->i", v, v)
    ww = np.einsum("ij,ij->i", w, w)
    uv = np.einsum("ij,ij->i", u, v)
    area_sq = np.maximum(uu * vv - uv * uv, 0.0)
    inv_denom = 1.0 / np.sqrt(uu * vv * ww) ** p
    kernel = area_sq * inv_denom

    # ∂A/∂b and ∂A/∂c of the Gram determinant A = |u|²|v|² - (u·v)²
    dA_db = 2.0 * (vv[:, None] * u - uv[:, None] * v)
    dA_dc = 2.0 * (uu[:, None] * v - uv[:, None] * u)
    dA_da = -(dA_db + dA_dc)

    # ∂ log(d_ab d_bc d_ca) with respect to a, b, c
    u_s = u / uu[:, None]
    v_s = v / vv[:, None]
    w_s = w / ww[:, None]
    dlog_da = -(u_s + v_s)
    dlog_db = u_s - w_s
    dlog_dc = v_s + w_s

    pk = (p * kernel)[:, None]
    dK_da = dA_da * inv_denom[:, None] - pk * dlog_da
    dK_db = dA_db * inv_denom[:, None] - pk * dlog_db
    dK_dc = dA_dc * inv_denom[:, None] - pk * dlog_dc

    li = lengths[i]
    lj = lengths[j]
    lk = lengths[k]
    product = li * lj * lk
    energy = float(np.sum(product * kernel))

    grad = np.zeros((n_edges, dim))
    half = 0.5 * product[:, None]

    # edge i: a single edge shared by the whole batch
    along_i = np.sum((lj * lk * kernel)) * tangents[i]
    mid_i = np.sum(half * dK_da, axis=0)
    grad[(i + 1) % n_edges] += along_i + mid_i
    grad[i] += -along_i + mid_i

    for edges, others, dK in ((j, li * lk, dK_db), (k, li * lj, dK_dc)):
        along = (others * kernel)[:, None] * tangents[edges]
        mid = half * dK
        np.add.at(grad, (edges + 1) % n_edges, along + mid)
        np.add.at(grad, edges, -along + mid)
    return energy, grad


def _map_ordered(
    func: Callable[[int], Any], indices: range, workers: int
) -> list[Any]:
    if workers <= 1 or len(indices) <= 1:
        return [func(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, indices))


def total_energy(P: Polyline, params: EnergyParams) -> float:
    """
    E_T(P) = 6 Σ_{i<j<k} W_P(I_i, I_j, I_k).

    Raises:
        MidpointCollision: If two edge midpoints are closer than the guard
    """
    mids = P.spatial_midpoints
    lengths = P.edge_lengths
    _check_midpoint_collisions(mids, params.degenerate_threshold * P.diameter())
    n_edges = P.n_vertices
    partials = _map_ordered(
        lambda i: _batch_energy(i, mids, lengths, params),
        range(n_edges - 2),
        params.workers,
    )
    total = 0.0
    for value in partials:
        total += value
    return 6.0 * total


def energy_differential(P: Polyline, params: EnergyParams) -> EnergyReport:
    """
    Evaluate E_T(P) and its differential DE_T(P) in one pass.

    The partials of W_P with respect to its six endpoints follow from the
    chain rule through ℓ_P(I) (giving ±τ_P(I)) and through m_P(I) (giving
    half of the kernel gradient at each endpoint). They are scatter-added per
    vertex.

    Raises:
        DegenerateEdge: If an edge has zero length
        MidpointCollision: If two edge midpoints are closer than the guard
    """
    tangents = unit_edge_vectors(P)
    mids = P.spatial_midpoints
    lengths = P.edge_lengths
    _check_midpoint_collisions(mids, params.degenerate_threshold * P.diameter())
    n_edges, dim = P.points.shape

    partials = _map_ordered(
        lambda i: _batch_differential(i, mids, lengths, tangents, params),
        range(n_edges - 2),
        params.workers,
    )
    value = 0.0
    grad = np.zeros((n_edges, dim))
    for energy, partial in partials:
        value += energy
        grad += partial

    triples = n_edges * (n_edges - 1) * (n_edges - 2) // 6
    logger.debug("energy %.12e over %d triples", 6.0 * value, triples)
    return EnergyReport(
        value=6.0 * value, differential=6.0 * grad, triple_count=triples
    )


def finite_difference_differential(
    P: Polyline, params: EnergyParams, h: float
) -> np.ndarray:
    """Central differences (E(P + h e) - E(P - h e)) / 2h per vertex coordinate."""
    if h <= 0.0:
        raise InvalidParams(f"finite difference step must be positive, got {h}")
    base = np.array(P.points)
    grad = np.zeros_like(base)
    for v in range(P.n_vertices):
        for c in range(P.ambient_dim):
            forward = base.copy()
            backward = base.copy()
            forward[v, c] += h
            backward[v, c] -= h
            grad[v, c] = (
                total_energy(P.with_points(forward), params)
                - total_energy(P.with_points(backward), params)
            ) / (2.0 * h)
    return grad


def brute_force_energy(P: Polyline, params: EnergyParams) -> float:
    """Reference value: six times local_contribution summed over unordered triples."""
    total = 0.0
    for triple in combinations(range(P.n_vertices), 3):
        total += local_contribution(P, *triple, params)
    return 6.0 * total
