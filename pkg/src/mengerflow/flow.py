"""
Projected Sobolev gradient flow with feasibility restoration.

One step of the flow from P(t):

    1. Evaluate E_T(P) and DE_T(P); assemble and factorize the saddle
       system A_T(P) (the Gagliardo block is reused across steps).
    2. Solve for the projected gradient g; the slope along -g is
       -DE·g = -‖g‖²_J.
    3. For step sizes τ = τ_prev · grow, τ_prev · grow · backtrack, ...:
         - predictor Q_0 = P - τ g (explicit Euler),
         - restoration Q_{k+1} = Q_k - v_k with the matrix frozen at P(t),
         - Armijo test E(Q) <= E(P) - σ τ ‖g‖²_J,
         - homotopy certificate between P and Q (optional).
       A failure of any stage shrinks τ and retries.

The run stops when ‖g‖_J falls below ``tol_grad`` times its initial value
(converged), when the projected gradient vanishes relative to ‖DE‖ (critical
point), when ``max_iters`` steps have been accepted, or when τ underflows.

Example:
    >>> from mengerflow.geometry import generate_torus_knot
    >>> result = run_flow(
    ...     generate_torus_knot(2, 3, 48), EnergyParams(), FlowConfig(max_iters=5)
    ... )
    >>> result.stop_reason
    'iteration budget'
"""

import logging
import time
from collections.abc import Callable
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .constraints import (
    StrainVector,
    barycenter_jacobian,
    constraint_violation,
    log_strain,
    log_strain_jacobian,
)
from .energy import EnergyParams, EnergyReport, energy_differential, total_energy
from .errors import (
    DegenerateEdge,
    InvalidInitialCurve,
    InvalidParams,
    MidpointCollision,
    NoDescent,
    RestorationDiverged,
    StepsizeUnderflow,
)
from .geometry.diagnostics import barycenter, is_embedded
from .geometry.models import Polyline
from .isotopy import HomotopyCertificate, IsotopyPolicy, certify_isotopy
from .saddle_solver import (
    SaddleSystem,
    assemble_saddle,
    factorize,
    solve_projected_gradient,
    solve_restoration,
)
from .sobolev_metric import GagliardoMatrix, assemble_gagliardo

logger = logging.getLogger(__name__)

StopReason = Literal[
    "converged", "critical point", "iteration budget", "stepsize underflow"
]

TRACE_COLUMNS = [
    "iter",
    "energy",
    "grad_norm_J",
    "tau",
    "feas_violation",
    "newton_iters",
    "isotopy_pass",
    "wall_ms",
]


class FlowConfig(BaseModel):
    """
    Line search, restoration and stopping parameters of the flow.

    Attributes:
        sigma_armijo (float): Sufficient decrease constant σ ∈ (0, 1)
        backtrack_factor (float): Step shrink factor ∈ (0, 1)
        step_grow_factor (float): Step growth between iterations (> 1)
        tau_init (float): First trial step size
        tau_min (float): Step size below which the run stops
        tol_feas (float): ℓ∞ strain tolerance of the restoration
        max_newton (int): Restoration iteration budget
        tol_grad (float): Relative ‖g‖_J stopping tolerance
        tol_critical (float): ‖g‖_J / ‖DE‖ below which P is critical
        max_iters (int): Accepted-step budget
        isotopy_check (bool): Certify every step's homotopy
        edge_floor, angle_margin, turning_samples, collision_tol: Homotopy
            certificate margins (see IsotopyPolicy)
        record_wall_time (bool): Fill the wall_ms trace column (0 otherwise)
    """

    sigma_armijo: float = Field(1e-4, gt=0.0, lt=1.0)
    backtrack_factor: float = Field(0.5, gt=0.0, lt=1.0)
    step_grow_factor: float = Field(2.0, gt=1.0)
    tau_init: float = Field(1.0, gt=0.0)
    tau_min: float = Field(1e-12, gt=0.0)
    tol_feas: float = Field(1e-8, gt=0.0)
    max_newton: int = Field(20, ge=1)
    tol_grad: float = Field(1e-6, gt=0.0)
    tol_critical: float = Field(1e-6, gt=0.0)
    max_iters: int = Field(100, ge=0)
    isotopy_check: bool = True
    edge_floor: float = Field(1e-9, gt=0.0)
    angle_margin: float = Field(0.1, gt=0.0, lt=np.pi)
    turning_samples: int = Field(16, ge=1)
    collision_tol: float = Field(1e-9, gt=0.0)
    record_wall_time: bool = True

    @property
    def isotopy_policy(self) -> IsotopyPolicy:
        return IsotopyPolicy(
            edge_floor=self.edge_floor,
            angle_margin=self.angle_margin,
            samples=self.turning_samples,
            collision_tol=self.collision_tol,
        )


class TraceRecord(BaseModel):
    """One row of the flow trace, describing the state after a step.

    ``isotopy_pass`` is None when the homotopy certificate is disabled.
    """

    iter: int
    energy: float
    grad_norm_J: float
    tau: float
    feas_violation: float
    newton_iters: int
    isotopy_pass: bool | None
    wall_ms: float


class StepOutcome(BaseModel):
    """Accepted candidate of one Armijo line search."""

    polyline: Polyline
    tau: float
    energy: float
    newton_iters: int
    trials: int
    certificate: HomotopyCertificate | None = None


class FlowState(BaseModel):
    """
    Mutable state of a running flow.

    Attributes:
        P (Polyline): Current polyline
        reference_strain (StrainVector): Strain of the initial curve
        reference_barycenter (np.ndarray): Barycenter of the initial curve
        tau (float | None): Last accepted step size
        iter (int): Number of accepted steps
        trace (list[TraceRecord]): One row per visited state
        certificates (list[HomotopyCertificate]): Certificates of accepted steps
        isotopy_rejections (int): Candidates rejected by the certificate
    """

    P: Polyline
    reference_strain: StrainVector
    reference_barycenter: np.ndarray
    tau: float | None = None
    iter: int = 0
    trace: list[TraceRecord] = Field(default_factory=list)
    certificates: list[HomotopyCertificate] = Field(default_factory=list)
    isotopy_rejections: int = 0

    model_config = ConfigDict(arbitrary_types_allowed=True)


class FlowResult(BaseModel):
    """Final polyline, trace and bookkeeping of a finished run."""

    final: Polyline
    trace: list[TraceRecord]
    stop_reason: StopReason
    accepted_steps: int
    certificates: list[HomotopyCertificate] = Field(default_factory=list)
    isotopy_rejections: int = 0

    def to_dataframe(self) -> pd.DataFrame:
        """Trace as a DataFrame with the columns of the CSV export."""
        rows = [record.model_dump() for record in self.trace]
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def predictor(P: Polyline, g: np.ndarray, tau: float) -> Polyline:
    """Explicit Euler step Q_0 = P - τ g."""
    if tau < 0.0:
        raise InvalidParams(f"step size must be non-negative, got {tau}")
    g = np.asarray(g, dtype=float).reshape(P.points.shape)
    return P.with_points(P.points - tau * g)


def restore_feasibility(
    Q0: Polyline,
    system: SaddleSystem,
    reference: StrainVector,
    cfg: FlowConfig,
) -> tuple[Polyline, int]:
    """
    Modified Newton iteration back onto the constraint manifold.

    Each iteration solves A_T(P(t)) (v, λ, μ) = (0, Σ_T(Q_k) - reference, 0)
    with the factorization of the base point and sets Q_{k+1} = Q_k - v.

    Returns:
        Tuple of the restored polyline and the number of iterations

    Raises:
        RestorationDiverged: If the violation grows, becomes non-finite, or
            is still above ``tol_feas`` after ``max_newton`` iterations
        DegenerateEdge: If an iterate collapses an edge
    """
    Q = Q0
    violation = constraint_violation(Q, reference)
    iterations = 0
    while violation > cfg.tol_feas:
        if iterations >= cfg.max_newton:
            raise RestorationDiverged(
                f"violation {violation:.3e} after {iterations} iterations",
                violation=violation,
                iterations=iterations,
            )
        residual = log_strain(Q).values - reference.values
        update, _, _ = solve_restoration(system, residual)
        points = Q.points - update
        if not np.all(np.isfinite(points)):
            raise RestorationDiverged(
                "restoration produced non-finite points", iterations=iterations
            )
        Q = Q.with_points(points)
        previous = violation
        violation = constraint_violation(Q, reference)
        iterations += 1
        logger.debug("restoration iteration %d: violation %.3e", iterations, violation)
        if not np.isfinite(violation) or violation > previous:
            raise RestorationDiverged(
                f"violation grew from {previous:.3e} to {violation:.3e}",
                violation=violation,
                iterations=iterations,
            )
    return Q, iterations


def armijo_step(
    state: FlowState,
    system: SaddleSystem,
    report: EnergyReport,
    g: np.ndarray,
    cfg: FlowConfig,
    params: EnergyParams,
) -> StepOutcome:
    """
    Backtracking line search along -g with restoration and certification.

    The first trial is ``tau_init`` (or the previous step times
    ``step_grow_factor``); each failure multiplies τ by ``backtrack_factor``.
    A trial is accepted when restoration succeeds, the Armijo condition
    φ(τ) <= φ(0) - σ τ ‖g‖²_J holds with strict decrease, and the homotopy
    certificate passes (when enabled). Updates ``state.tau``.

    Raises:
        NoDescent: If ‖g‖_J is negligible relative to ‖DE‖
        StepsizeUnderflow: If τ drops below ``tau_min``
    """
    slope = float(report.flat @ np.asarray(g, dtype=float).reshape(-1))
    if slope <= 0.0 or np.sqrt(slope) <= cfg.tol_critical * report.norm:
        raise NoDescent(f"projected gradient vanishes (DE.g = {slope:.3e})")

    P = state.P
    phi0 = report.value
    policy = cfg.isotopy_policy
    tau = cfg.tau_init if state.tau is None else state.tau * cfg.step_grow_factor
    trials = 0
    while True:
        if tau < cfg.tau_min:
            raise StepsizeUnderflow(
                f"step size {tau:.3e} below tau_min={cfg.tau_min:.1e} "
                f"after {trials} trials"
            )
        trials += 1
        try:
            Q, newton_iters = restore_feasibility(
                predictor(P, g, tau), system, state.reference_strain, cfg
            )
            energy = total_energy(Q, params)
        except (RestorationDiverged, DegenerateEdge, MidpointCollision) as e:
            logger.warning("tau=%.3e rejected by restoration: %s", tau, e)
            tau *= cfg.backtrack_factor
            continue

        if not (energy <= phi0 - cfg.sigma_armijo * tau * slope and energy < phi0):
            logger.debug(
                "tau=%.3e rejected: Armijo (E=%.12e, E0=%.12e)", tau, energy, phi0
            )
            tau *= cfg.backtrack_factor
            continue

        certificate = None
        if cfg.isotopy_check:
            certificate = certify_isotopy(P, Q, policy)
            if not certificate.passed:
                state.isotopy_rejections += 1
                logger.warning(
                    "tau=%.3e rejected by homotopy certificate: %s",
                    tau,
                    certificate.reason,
                )
                tau *= cfg.backtrack_factor
                continue

        state.tau = tau
        return StepOutcome(
            polyline=Q,
            tau=tau,
            energy=energy,
            newton_iters=newton_iters,
            trials=trials,
            certificate=certificate,
        )


def _ensure_metric(
    J: GagliardoMatrix | None, P: Polyline, params: EnergyParams
) -> GagliardoMatrix:
    if J is None or not J.matches(P.partition, params):
        return assemble_gagliardo(P, params)
    return J


class GradientEvaluation(BaseModel):
    """Energy, factorized saddle system and projected gradient at one state."""

    report: EnergyReport
    system: SaddleSystem
    g: np.ndarray
    norm_J: float

    model_config = ConfigDict(arbitrary_types_allowed=True)


def projected_gradient(
    P: Polyline,
    params: EnergyParams,
    J: GagliardoMatrix | None = None,
    label: str = "",
) -> GradientEvaluation:
    """
    Evaluate DE_T(P) and the projected gradient g at P.

    ‖g‖_J is computed as √(DE·g), which equals ⟨J g, g⟩ for the saddle
    solution. J is assembled when not given or not matching P's partition.
    """
    J = _ensure_metric(J, P, params)
    report = energy_differential(P, params)
    B = log_strain_jacobian(P)
    C = barycenter_jacobian(P.partition, P.ambient_dim)
    system = factorize(assemble_saddle(J, B, C, base_point_fingerprint=label))
    g, _, _ = solve_projected_gradient(system, report.flat)
    norm_J = float(np.sqrt(max(float(report.flat @ g.reshape(-1)), 0.0)))
    return GradientEvaluation(report=report, system=system, g=g, norm_J=norm_J)


def _isotopy_outcome(last_step: StepOutcome | None, cfg: FlowConfig) -> bool | None:
    # None when no certificate was computed; row 0 reports the embeddedness check
    if not cfg.isotopy_check:
        return None
    if last_step is None:
        return True
    if last_step.certificate is None:
        return None
    return last_step.certificate.passed


def run_flow(
    P0: Polyline,
    params: EnergyParams,
    cfg: FlowConfig,
    on_step: Callable[[FlowState], None] | None = None,
) -> FlowResult:
    """
    Run the projected gradient flow from P0.

    Args:
        P0: Regular, embedded initial polyline
        params: Energy parameters
        cfg: Flow configuration
        on_step: Called with the state after every accepted step

    Returns:
        FlowResult: Final polyline, trace (row 0 is the initial state) and
        stop reason

    Raises:
        InvalidInitialCurve: If P0 has a zero edge or self-intersects
    """
    if not P0.is_regular or not is_embedded(P0):
        raise InvalidInitialCurve("initial polyline is degenerate or self-intersecting")

    state = FlowState(
        P=P0,
        reference_strain=log_strain(P0),
        reference_barycenter=barycenter(P0),
    )
    J: GagliardoMatrix | None = None
    g0: float | None = None
    last_step: StepOutcome | None = None
    start = time.perf_counter()
    stop_reason: StopReason

    while True:
        P = state.P
        J = _ensure_metric(J, P, params)
        evaluation = projected_gradient(P, params, J, label=f"step-{state.iter}")
        report = evaluation.report
        grad_norm = evaluation.norm_J
        if g0 is None:
            g0 = grad_norm

        wall_ms = (time.perf_counter() - start) * 1e3 if cfg.record_wall_time else 0.0
        state.trace.append(
            TraceRecord(
                iter=state.iter,
                energy=report.value,
                grad_norm_J=grad_norm,
                tau=0.0 if last_step is None else last_step.tau,
                feas_violation=constraint_violation(P, state.reference_strain),
                newton_iters=0 if last_step is None else last_step.newton_iters,
                isotopy_pass=_isotopy_outcome(last_step, cfg),
                wall_ms=wall_ms,
            )
        )

        if grad_norm <= cfg.tol_critical * report.norm:
            stop_reason = "critical point"
            break
        if state.iter > 0 and grad_norm <= cfg.tol_grad * g0:
            stop_reason = "converged"
            break
        if state.iter >= cfg.max_iters:
            stop_reason = "iteration budget"
            break

        try:
            last_step = armijo_step(
                state, evaluation.system, report, evaluation.g, cfg, params
            )
        except NoDescent:
            stop_reason = "critical point"
            break
        except StepsizeUnderflow as e:
            logger.warning("stopping: %s", e)
            stop_reason = "stepsize underflow"
            break

        state.P = last_step.polyline
        state.iter += 1
        if last_step.certificate is not None:
            state.certificates.append(last_step.certificate)
        logger.info(
            "step %d: E=%.12e (dE=%.3e) |g|_J=%.3e tau=%.3e newton=%d",
            state.iter,
            last_step.energy,
            report.value - last_step.energy,
            grad_norm,
            last_step.tau,
            last_step.newton_iters,
        )
        if on_step is not None:
            on_step(state)

    logger.info("flow stopped after %d steps: %s", state.iter, stop_reason)
    return FlowResult(
        final=state.P,
        trace=state.trace,
        stop_reason=stop_reason,
        accepted_steps=state.iter,
        certificates=state.certificates,
        isotopy_rejections=state.isotopy_rejections,
    )
