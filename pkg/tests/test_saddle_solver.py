"""Tests for the saddle point system and its solves."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.linalg import null_space

from mengerflow.constraints import barycenter_jacobian, log_strain_jacobian
from mengerflow.energy import EnergyParams, energy_differential
from mengerflow.errors import DimensionMismatch, SingularSystem
from mengerflow.geometry import (
    Polyline,
    add_vertex_noise,
    generate_torus_knot,
    regular_polygon,
)
from mengerflow.saddle_solver import (
    SaddleSystem,
    assemble_saddle,
    factorize,
    solve_projected_gradient,
    solve_restoration,
)
from mengerflow.sobolev_metric import assemble_gagliardo


def build_system(P: Polyline, params: EnergyParams) -> SaddleSystem:
    J = assemble_gagliardo(P, params)
    B = log_strain_jacobian(P)
    C = barycenter_jacobian(P.partition, P.ambient_dim)
    return factorize(assemble_saddle(J, B, C))


def backward_error(system: SaddleSystem, x: np.ndarray, rhs: np.ndarray) -> float:
    A = system.matrix
    residual = np.linalg.norm(A @ x - rhs)
    return float(
        residual / (np.linalg.norm(A, 2) * np.linalg.norm(x) + np.linalg.norm(rhs))
    )


@pytest.fixture(params=list(enumerate([6, 8, 12, 16, 20, 24, 28, 32, 10, 14])))
def random_instance(request):
    seed, N = request.param
    P = add_vertex_noise(regular_polygon(N), 0.2 * np.sin(np.pi / N), seed=seed)
    return P, np.random.default_rng(100 + seed)


def test_dimension_and_layout(trefoil, params):
    system = build_system(trefoil, params)
    N = trefoil.n_vertices
    assert system.dimension == 4 * N + 3
    assert system.matrix.shape == (4 * N + 3, 4 * N + 3)
    np.testing.assert_array_equal(system.matrix, system.matrix.T)
    np.testing.assert_array_equal(system.matrix[3 * N :, 3 * N :], 0.0)


def test_projected_gradient_contracts(random_instance, params):
    P, rng = random_instance
    system = build_system(P, params)
    N, n = P.points.shape
    dE = rng.normal(size=(N, n))

    g, lam, mu = solve_projected_gradient(system, dE)
    x = np.concatenate([g.reshape(-1), lam, mu])
    rhs = np.zeros(system.dimension)
    rhs[: n * N] = dE.reshape(-1)
    assert backward_error(system, x, rhs) <= 1e-9

    B = log_strain_jacobian(P)
    C = barycenter_jacobian(P.partition, n)
    scale = np.linalg.norm(system.matrix, 2) * np.linalg.norm(x)
    assert np.max(np.abs(B.apply(g))) <= 1e-10 * scale
    assert np.max(np.abs(C.apply(g))) <= 1e-10 * scale


def test_restoration_is_J_orthogonal_to_constraint_kernel(random_instance, params):
    P, rng = random_instance
    system = build_system(P, params)
    N, n = P.points.shape
    violation = 1e-3 * rng.normal(size=N)

    v, lam, mu = solve_restoration(system, violation)
    x = np.concatenate([v.reshape(-1), lam, mu])
    rhs = np.zeros(system.dimension)
    rhs[n * N : n * N + N] = violation
    assert backward_error(system, x, rhs) <= 1e-9

    B = log_strain_jacobian(P).dense()
    C = barycenter_jacobian(P.partition, n).matrix
    scale = np.linalg.norm(system.matrix, 2) * np.linalg.norm(x)
    np.testing.assert_allclose(B @ v.reshape(-1), violation, atol=1e-10 * scale)
    kernel = null_space(np.vstack([B, C]))
    Jv = assemble_gagliardo(P, params).full() @ v.reshape(-1)
    assert np.linalg.norm(kernel.T @ Jv) <= 1e-8 * scale


def test_projected_gradient_norm_identity(trefoil, params):
    system = build_system(trefoil, params)
    report = energy_differential(trefoil, params)
    g, _, _ = solve_projected_gradient(system, report.flat)
    J = assemble_gagliardo(trefoil, params)
    gJg = float(g.reshape(-1) @ J.full() @ g.reshape(-1))
    assert float(report.flat @ g.reshape(-1)) == pytest.approx(gJg, rel=1e-8)


def test_factorization_leaves_assembled_system_untouched(trefoil, params):
    J = assemble_gagliardo(trefoil, params)
    B = log_strain_jacobian(trefoil)
    C = barycenter_jacobian(trefoil.partition, 3)
    assembled = assemble_saddle(J, B, C)
    system = factorize(assembled)
    assert not assembled.is_factorized
    assert system.is_factorized
    assert factorize(system) is system
    assert system.factorization_count == 1
    assert not system.matrix.flags.writeable
    with pytest.raises(ValidationError):
        system.base_point_fingerprint = "elsewhere"


def test_one_factorization_serves_concurrent_solves(trefoil, params):
    system = build_system(trefoil, params)
    rng = np.random.default_rng(5)
    fields = rng.normal(size=(8, trefoil.n_vertices, 3))
    serial = [solve_projected_gradient(system, dE)[0] for dE in fields]
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = list(
            pool.map(lambda dE: solve_projected_gradient(system, dE)[0], fields)
        )
    for expected, actual in zip(serial, threaded, strict=True):
        np.testing.assert_allclose(actual, expected, rtol=1e-13, atol=0)
    assert system.factorization_count == 1


def test_residual_helper(trefoil, params):
    system = build_system(trefoil, params)
    rhs = np.zeros(system.dimension)
    rhs[0] = 1.0
    field, lam, mu = solve_projected_gradient(system, rhs[: 3 * trefoil.n_vertices])
    x = np.concatenate([field.reshape(-1), lam, mu])
    assert system.residual(x, rhs) <= 1e-6


def test_singular_system_detected(params):
    # collinear curve: the strain rows are linearly dependent
    P = Polyline.from_points(
        np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0], [2, 0, 0]], dtype=float)
    )
    J = assemble_gagliardo(P, params)
    B = log_strain_jacobian(P)
    C = barycenter_jacobian(P.partition, 3)
    with pytest.raises(SingularSystem):
        factorize(assemble_saddle(J, B, C))


def test_unfactorized_solve_rejected(trefoil, params):
    J = assemble_gagliardo(trefoil, params)
    B = log_strain_jacobian(trefoil)
    C = barycenter_jacobian(trefoil.partition, 3)
    system = assemble_saddle(J, B, C)
    with pytest.raises(SingularSystem, match="not been factorized"):
        solve_projected_gradient(system, np.zeros((24, 3)))


def test_block_dimensions_checked(params):
    P = generate_torus_knot(2, 3, 12)
    J = assemble_gagliardo(generate_torus_knot(2, 3, 13), params)
    with pytest.raises(DimensionMismatch):
        assemble_saddle(
            J, log_strain_jacobian(P), barycenter_jacobian(P.partition, 3)
        )
