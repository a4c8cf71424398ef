"""Configuration for command-line runs of MengerFlow.

The library functions take their parameters as explicit pydantic models
(:class:`~mengerflow.energy.EnergyParams`, :class:`~mengerflow.flow.FlowConfig`).
This package bundles them with the run-level options of the command-line
interface and loads them from files.

Components:
    - RunConfig: Energy and flow parameters, initial curve, noise, output
      directory, frame cadence, export formats, threads
    - CurveSpec: Initial curve selection (torus knot, square knot preset,
      regular polygon or OBJ file)
    - load_config_file: Plain-text ``key = value`` loader
    - build_run_config: Merge flat settings into a validated RunConfig

Precedence:
    Defaults < config file < command-line flags. Unknown keys are rejected.

Example:
    >>> from mengerflow.config import build_run_config
    >>> cfg = build_run_config({"curve": "torus:2,3", "n": 64, "p": 2.4})
    >>> cfg.initial_curve().n_vertices
    64
"""

from .schema import (
    CurveSpec,
    RunConfig,
    build_run_config,
    load_config_file,
    normalize_key,
)

__all__ = [
    "RunConfig",  # Complete run configuration
    "CurveSpec",  # Initial curve selection
    # Loading
    "load_config_file",
    "build_run_config",
    "normalize_key",
]
