"""
Certification of the linear homotopy between two polylines.

A step from P to Q is accepted only if F(λ) = (1 - λ) P + λ Q is an
embedded regular polyline for every λ ∈ [0, 1]; then P and Q are ambient
isotopic and the knot class is preserved. Three checks are combined:

    1. Edge lengths: the exact minimum over λ of every |a_I + λ b_I|, with
       a_I the edge vector of P and b_I the change of that edge vector.
    2. Turning angles: sampled on a uniform λ grid and required to stay
       below π minus a safety margin.
    3. Swept collisions: for each pair of edges without a common vertex,
       the times at which the two moving segments are coplanar are the
       roots of the cubic det[w(λ), e_i(λ), e_j(λ)]; the segments can only
       meet at such a time, so the static segment distance is tested there
       (and at λ = 0, 1). Edges sharing a vertex are tested for folding
       back onto each other instead.

Degenerate configurations (identically coplanar or collinear motion) fall
back to larger candidate sets, so numerical trouble produces a reported
collision rather than a missed one.

Swept collisions are tested in R^2 (embedded as z = 0) and R^3. In higher
dimensions every closed curve is unknotted and only the first two checks
run.
"""

import logging
from collections.abc import Iterable

import numpy as np
from numpy.polynomial import polynomial as poly
from pydantic import BaseModel, Field
from scipy.optimize import brentq

from .errors import DegenerateEdge, PartitionMismatch
from .geometry.diagnostics import non_adjacent_pairs, segment_distances
from .geometry.models import Polyline

logger = logging.getLogger(__name__)

_ROOT_XTOL = 1e-15
_FLAT_RTOL = 1e-12
_NEAR_FLAT_RTOL = 1e-9


class IsotopyPolicy(BaseModel):
    """
    Margins of the homotopy certificate.

    Attributes:
        edge_floor (float): Minimum edge length relative to the diameter
        angle_margin (float): Required distance of turning angles from π
        samples (int): Number of λ intervals for the turning-angle check
        collision_tol (float): Contact distance relative to the diameter
    """

    edge_floor: float = Field(1e-9, gt=0.0, description="Relative edge floor")
    angle_margin: float = Field(0.1, gt=0.0, lt=np.pi, description="Radians")
    samples: int = Field(16, ge=1, description="λ intervals for turning angles")
    collision_tol: float = Field(
        1e-9, gt=0.0, description="Relative contact distance"
    )


class HomotopyCertificate(BaseModel):
    """
    Outcome of the three homotopy checks for one candidate step.

    Attributes:
        passed (bool): All checks passed
        min_edge_length_over_lambda (float): Exact minimum edge length
        max_turning_angle_over_lambda (float): Sampled maximum turning angle
            (π when an edge collapses)
        first_collision_lambda (float | None): Earliest contact time
        failing_pair (tuple[int, int] | None): Edges in earliest contact
        reason (str | None): Short description of the first failed check
    """

    passed: bool
    min_edge_length_over_lambda: float
    max_turning_angle_over_lambda: float
    first_collision_lambda: float | None = None
    failing_pair: tuple[int, int] | None = None
    reason: str | None = None


def _check_same_partition(P: Polyline, Q: Polyline) -> None:
    if not P.partition.same_as(Q.partition) or P.ambient_dim != Q.ambient_dim:
        raise PartitionMismatch(
            "homotopy endpoints must share partition and ambient dimension"
        )


def min_edge_length_over_homotopy(P: Polyline, Q: Polyline) -> float:
    """
    min over λ ∈ [0, 1] and edges I of |a_I + λ b_I|.

    The minimizer of the quadratic |a + λb|² is λ* = -⟨a, b⟩ / |b|², clamped
    to [0, 1].

    Raises:
        PartitionMismatch: If P and Q live on different partitions
    """
    _check_same_partition(P, Q)
    a = P.edge_vectors
    b = Q.edge_vectors - a
    bb = np.sum(b * b, axis=1)
    ab = np.sum(a * b, axis=1)
    safe = np.where(bb > 0.0, bb, 1.0)
    lam = np.where(bb > 0.0, np.clip(-ab / safe, 0.0, 1.0), 0.0)
    lengths = np.linalg.norm(a + lam[:, None] * b, axis=1)
    return float(lengths.min())


def max_turning_angle_over_homotopy(
    P: Polyline, Q: Polyline, samples: int = 16
) -> float:
    """
    Largest turning angle of F(λ) over λ = i/samples, i = 0, ..., samples.

    Raises:
        PartitionMismatch: If P and Q live on different partitions
        DegenerateEdge: If an edge has zero length at a sampled λ
    """
    _check_same_partition(P, Q)
    largest = 0.0
    for lam in np.linspace(0.0, 1.0, samples + 1):
        points = (1.0 - lam) * P.points + lam * Q.points
        edges = np.roll(points, -1, axis=0) - points
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths == 0.0):
            edge = int(np.flatnonzero(lengths == 0.0)[0])
            raise DegenerateEdge(
                f"edge {edge} collapses at lambda={lam:.4f}", edge=edge
            )
        tangents = edges / lengths[:, None]
        cosines = np.sum(np.roll(tangents, 1, axis=0) * tangents, axis=1)
        angle = float(np.max(np.arccos(np.clip(cosines, -1.0, 1.0))))
        largest = max(largest, angle)
    return largest


def _quadratic_roots(c0: float, c1: float, c2: float) -> list[float]:
    """Real roots of c0 + c1 x + c2 x² (c1, c2 not both zero)."""
    if c2 == 0.0:
        return [-c0 / c1] if c1 != 0.0 else []
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    q = -0.5 * (c1 + np.copysign(np.sqrt(disc), c1))
    roots = [q / c2]
    if q != 0.0:
        roots.append(c0 / q)
    return roots


def _roots_in_unit_interval(coeffs: np.ndarray) -> list[float]:
    """
    Real roots in [0, 1] of a polynomial of degree <= 3 (ascending coefficients).

    The interval is split at the critical points, which come from the
    quadratic formula; each monotone piece holds at most one root, isolated
    by bracketing. Critical points where the polynomial (nearly) vanishes are
    reported as double roots.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return []
    coeffs = poly.polytrim(coeffs, tol=_FLAT_RTOL * scale)
    if len(coeffs) == 1:
        return []

    def f(x: float) -> float:
        return float(poly.polyval(x, coeffs))

    critical: list[float] = []
    if len(coeffs) > 2:
        slope = np.zeros(3)
        derivative = poly.polyder(coeffs)
        slope[: len(derivative)] = derivative
        critical = sorted(x for x in _quadratic_roots(*slope) if 0.0 < x < 1.0)
    breaks = [0.0, *critical, 1.0]
    tiny = _FLAT_RTOL * scale

    roots: list[float] = []
    for lo, hi in zip(breaks[:-1], breaks[1:], strict=True):
        f_lo, f_hi = f(lo), f(hi)
        if abs(f_lo) <= tiny:
            roots.append(lo)
        elif f_lo * f_hi < 0.0 and abs(f_hi) > tiny:
            roots.append(float(brentq(f, lo, hi, xtol=_ROOT_XTOL)))
    if abs(f(1.0)) <= tiny:
        roots.append(1.0)
    return roots


def _linear(start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Per-component coefficients (c0, c1) of start + λ (end - start)."""
    return np.stack([start, end - start], axis=1)


def _cross_poly(a: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    """Component polynomials of a(λ) × b(λ) for polynomial 3-vectors."""
    return [
        poly.polysub(poly.polymul(a[1], b[2]), poly.polymul(a[2], b[1])),
        poly.polysub(poly.polymul(a[2], b[0]), poly.polymul(a[0], b[2])),
        poly.polysub(poly.polymul(a[0], b[1]), poly.polymul(a[1], b[0])),
    ]


def _dot_poly(a: Iterable[np.ndarray], b: Iterable[np.ndarray]) -> np.ndarray:
    total = np.zeros(1)
    for x, y in zip(a, b, strict=True):
        total = poly.polyadd(total, poly.polymul(x, y))
    return total


def _is_flat(coeffs: np.ndarray, scale: float) -> bool:
    return bool(np.all(np.abs(coeffs) <= _FLAT_RTOL * scale))


def _candidate_times(polys: Iterable[np.ndarray], scale: float) -> set[float]:
    times: set[float] = set()
    for c in polys:
        if not _is_flat(c, scale):
            times.update(_roots_in_unit_interval(c))
    return times


def segment_pair_collision_time(
    start: np.ndarray, end: np.ndarray, tol: float
) -> float | None:
    """
    Earliest λ ∈ [0, 1] at which two linearly moving segments touch.

    Args:
        start: Endpoints at λ = 0 as array (4, 3): a0, a1 of the first
            segment, then b0, b1 of the second
        end: The same endpoints at λ = 1
        tol: Contact distance

    Returns:
        The earliest contact time, or None if the segments stay apart
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    a0, a1, b0, b1 = (_linear(start[k], end[k]) for k in range(4))
    e_a = a1 - a0
    e_b = b1 - b0
    w = b0 - a0

    extent = float(np.max(np.abs(np.vstack([start, end]) - start[0])))
    extent = max(extent, tol)

    normal = _cross_poly(e_a, e_b)
    coplanar = _dot_poly(w, normal)
    flat_scale = extent**3
    times = {0.0, 1.0}
    if not _is_flat(coplanar, flat_scale):
        times.update(_roots_in_unit_interval(coplanar))
    if np.all(np.abs(coplanar) <= _NEAR_FLAT_RTOL * flat_scale):
        # nearly coplanar throughout: contact starts with an endpoint
        # reaching the other segment's line
        for edge, base, others in ((e_a, a0, (b0, b1)), (e_b, b0, (a0, a1))):
            for point in others:
                side = _cross_poly(edge, point - base)
                times.update(_candidate_times(side, extent**2))
                if all(_is_flat(c, extent**2) for c in side):
                    # collinear: contact starts where endpoints pass each other
                    for far in (base, base + edge):
                        times.update(_candidate_times(point - far, extent))

    for lam in sorted(times):
        at = (1.0 - lam) * start + lam * end
        distance = float(segment_distances(at[0], at[1], at[2], at[3]))
        if distance <= tol:
            return float(lam)
    return None


def adjacent_fold_time(
    start: np.ndarray, end: np.ndarray, tol: float
) -> float | None:
    """
    Earliest λ at which two edges sharing a vertex fold onto each other.

    Args:
        start: Points at λ = 0 as array (3, 3): lower end of the first edge,
            the shared vertex, upper end of the second edge
        end: The same points at λ = 1
        tol: Relative tolerance on |a × b| / (|a| |b|)

    Returns:
        The earliest λ with the two far ends on the same ray from the shared
        vertex, or None
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    x, s, y = (_linear(start[k], end[k]) for k in range(3))
    a = x - s
    b = y - s
    extent = max(float(np.max(np.abs(np.vstack([start, end]) - start[1]))), tol)

    side = _cross_poly(a, b)
    times = {0.0, 1.0} | _candidate_times(side, extent**2)
    if all(_is_flat(c, extent**2) for c in side):
        times |= _candidate_times([_dot_poly(a, b)], extent**2)

    for lam in sorted(times):
        at = (1.0 - lam) * start + lam * end
        u = at[0] - at[1]
        v = at[2] - at[1]
        nu = float(np.linalg.norm(u))
        nv = float(np.linalg.norm(v))
        if nu == 0.0 or nv == 0.0:
            return float(lam)
        if float(np.linalg.norm(np.cross(u, v))) <= tol * nu * nv and u @ v > 0.0:
            return float(lam)
    return None


def _as_3d(points: np.ndarray) -> np.ndarray:
    if points.shape[1] == 3:
        return points
    padded = np.zeros((points.shape[0], 3))
    padded[:, : points.shape[1]] = points
    return padded


def _broad_phase(
    P: np.ndarray, Q: np.ndarray, pairs: tuple[np.ndarray, np.ndarray], pad: float
) -> tuple[np.ndarray, np.ndarray]:
    """Keep the pairs whose swept axis-aligned boxes overlap."""
    nxt_P = np.roll(P, -1, axis=0)
    nxt_Q = np.roll(Q, -1, axis=0)
    corners = np.stack([P, nxt_P, Q, nxt_Q])
    lower = corners.min(axis=0) - pad
    upper = corners.max(axis=0) + pad
    i, j = pairs
    overlap = np.all((lower[i] <= upper[j]) & (lower[j] <= upper[i]), axis=1)
    return i[overlap], j[overlap]


def swept_collision_check(
    P: Polyline, Q: Polyline, tol: float | None = None
) -> tuple[float, tuple[int, int]] | None:
    """
    Earliest self-contact of the linear homotopy from P to Q.

    Args:
        P, Q: Homotopy endpoints on the same partition
        tol: Contact distance (default 1e-9 times the larger diameter)

    Returns:
        (λ, (i, j)) for the earliest contact, ordered by λ then pair index,
        or None. Ambient dimensions above 3 always return None.

    Raises:
        PartitionMismatch: If P and Q live on different partitions
    """
    _check_same_partition(P, Q)
    if P.ambient_dim > 3:
        return None
    if tol is None:
        tol = 1e-9 * max(P.diameter(), Q.diameter())

    start = _as_3d(np.asarray(P.points))
    end = _as_3d(np.asarray(Q.points))
    n_edges = P.n_vertices
    hits: list[tuple[float, int, int]] = []

    ii, jj = _broad_phase(start, end, non_adjacent_pairs(n_edges), tol)
    for i, j in zip(ii.tolist(), jj.tolist(), strict=True):
        idx = [i, (i + 1) % n_edges, j, (j + 1) % n_edges]
        lam = segment_pair_collision_time(start[idx], end[idx], tol)
        if lam is not None:
            hits.append((lam, i, j))

    for i in range(n_edges):
        idx = [i, (i + 1) % n_edges, (i + 2) % n_edges]
        lam = adjacent_fold_time(start[idx], end[idx], _FLAT_RTOL)
        if lam is not None:
            j = (i + 1) % n_edges
            hits.append((lam, min(i, j), max(i, j)))

    if not hits:
        return None
    lam, i, j = min(hits)
    logger.debug("swept contact between edges %d and %d at lambda=%.6f", i, j, lam)
    return lam, (i, j)


def certify_isotopy(
    P: Polyline, Q: Polyline, policy: IsotopyPolicy | None = None
) -> HomotopyCertificate:
    """
    Run all three homotopy checks and combine them into a certificate.

    Args:
        P: Current (embedded) polyline
        Q: Candidate polyline on the same partition
        policy: Margins; defaults to ``IsotopyPolicy()``

    Returns:
        HomotopyCertificate: ``passed`` is True iff every check passes

    Raises:
        PartitionMismatch: If P and Q live on different partitions
    """
    policy = policy or IsotopyPolicy()
    _check_same_partition(P, Q)
    diameter = max(P.diameter(), Q.diameter())

    min_length = min_edge_length_over_homotopy(P, Q)
    if min_length <= policy.edge_floor * diameter:
        return HomotopyCertificate(
            passed=False,
            min_edge_length_over_lambda=min_length,
            max_turning_angle_over_lambda=float(np.pi),
            reason="edge collapses along the homotopy",
        )

    try:
        max_angle = max_turning_angle_over_homotopy(P, Q, policy.samples)
    except DegenerateEdge:
        max_angle = float(np.pi)

    collision = swept_collision_check(P, Q, policy.collision_tol * diameter)
    reason = None
    if max_angle >= np.pi - policy.angle_margin:
        reason = "turning angle too close to pi"
    if collision is not None:
        reason = f"edges {collision[1]} collide at lambda={collision[0]:.6f}"

    return HomotopyCertificate(
        passed=reason is None,
        min_edge_length_over_lambda=min_length,
        max_turning_angle_over_lambda=max_angle,
        first_collision_lambda=None if collision is None else collision[0],
        failing_pair=None if collision is None else collision[1],
        reason=reason,
    )
