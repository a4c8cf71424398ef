"""MengerFlow: Sobolev gradient flow of integral Menger curvature for knots.

MengerFlow minimizes a discrete integral Menger curvature energy over closed
polygonal curves in R^n. The energy is descended along its projected gradient
with respect to a fractional Sobolev metric, subject to two constraints: each
edge keeps its length and the barycenter stays fixed. Every accepted step can
be certified to stay inside the knot class of the initial curve.

Package Structure:
    - geometry: Partition and Polyline data model, diagnostics, generators
    - energy: Discrete energy E_T and its analytic differential
    - sobolev_metric: Gagliardo Gram matrix J_T
    - constraints: Logarithmic strain and barycenter constraint maps
    - saddle_solver: Saddle point system and its LU factorization
    - flow: Line search, feasibility restoration, flow driver
    - isotopy: Homotopy certificate between consecutive polylines
    - curve_io, config, visualization: Files, run configuration, plots
    - CLI: python -m mengerflow

Quick Start:
    >>> import mengerflow as mf
    >>> P0 = mf.generate_torus_knot(2, 3, 48)
    >>> result = mf.run_flow(P0, mf.EnergyParams(), mf.FlowConfig(max_iters=20))
    >>> result.to_dataframe()["energy"].is_monotonic_decreasing
    True

Command-line Usage:
    $ pixi run mengerflow flow --curve torus:2,3 --n 48 --max-iters 200
    $ pixi run mengerflow diagnose out/final.obj
"""

from .constraints import (
    barycenter_jacobian,
    constraint_violation,
    log_strain,
    log_strain_jacobian,
)
from .energy import (
    EnergyParams,
    EnergyReport,
    energy_differential,
    local_contribution,
    total_energy,
)
from .errors import MengerFlowError
from .flow import (
    FlowConfig,
    FlowResult,
    armijo_step,
    predictor,
    projected_gradient,
    restore_feasibility,
    run_flow,
)
from .geometry import (
    Partition,
    Polyline,
    add_vertex_noise,
    generate_square_knot,
    generate_torus_knot,
    geometry_diagnostics,
    regular_polygon,
)
from .isotopy import HomotopyCertificate, IsotopyPolicy, certify_isotopy
from .saddle_solver import (
    assemble_saddle,
    factorize,
    solve_projected_gradient,
    solve_restoration,
)
from .sobolev_metric import assemble_gagliardo, discrete_seminorm, gagliardo_product

__version__ = "0.0.1"

__all__ = [
    # Geometry
    "Partition",
    "Polyline",
    "generate_torus_knot",
    "generate_square_knot",
    "regular_polygon",
    "add_vertex_noise",
    "geometry_diagnostics",
    # Energy
    "EnergyParams",
    "EnergyReport",
    "local_contribution",
    "total_energy",
    "energy_differential",
    # Metric and constraints
    "assemble_gagliardo",
    "gagliardo_product",
    "discrete_seminorm",
    "log_strain",
    "log_strain_jacobian",
    "barycenter_jacobian",
    "constraint_violation",
    # Saddle system
    "assemble_saddle",
    "factorize",
    "solve_projected_gradient",
    "solve_restoration",
    # Flow
    "FlowConfig",
    "FlowResult",
    "predictor",
    "restore_feasibility",
    "armijo_step",
    "projected_gradient",
    "run_flow",
    # Isotopy
    "IsotopyPolicy",
    "HomotopyCertificate",
    "certify_isotopy",
    # Errors
    "MengerFlowError",
]
