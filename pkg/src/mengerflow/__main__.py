"""Command-line interface for MengerFlow.

Subcommands:
    generate: Write an initial curve to OBJ
    flow:     Run the projected gradient flow, writing the trace CSV, frames
              and the final curve
    energy:   Print the energy of a curve
    diagnose: Print energy, seminorm, embeddedness and regularity indicators

Usage Examples:
    # Trefoil with 48 edges, slightly perturbed
    python -m mengerflow generate --curve torus:2,3 --n 48 --noise 1e-3 --seed 7

    # Flow for 200 steps, a frame every 10 steps
    python -m mengerflow flow --curve torus:2,3 --n 48 --max-iters 200 \\
        --frame-every 10 --out runs/trefoil

    # Diagnostics of a stored curve
    python -m mengerflow diagnose runs/trefoil/final.obj

Configuration:
    Every flag may also be given in a ``key = value`` file passed with
    ``--config``; flags on the command line override the file.

Exit Codes:
    0 on success, 1 on any error (printed as ``Error: ...``).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .config import RunConfig, build_run_config, load_config_file
from .curve_io import read_obj, write_frame, write_obj, write_trace_csv
from .energy import energy_differential
from .errors import MengerFlowError
from .flow import FlowState, projected_gradient, run_flow
from .geometry.diagnostics import geometry_diagnostics, is_embedded
from .geometry.models import Polyline
from .sobolev_metric import assemble_gagliardo, discrete_seminorm
from .visualization import plot_curve, plot_trace

logger = logging.getLogger(__name__)

# CLI destinations that are not run settings
_NON_CONFIG = {"command", "config", "verbose", "curve_file", "output"}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="key = value configuration file")
    common.add_argument(
        "--verbose", "-v", action="store_true", help="Enable debug logging"
    )
    common.add_argument("--p", type=float, help="Distance exponent, 7/3 < p < 8/3")
    common.add_argument(
        "--allow-outside-range",
        action="store_true",
        default=None,
        help="Accept p outside (7/3, 8/3)",
    )
    common.add_argument("--n", type=int, help="Number of vertices N (default 48)")
    common.add_argument(
        "--curve",
        help="torus:a,b | square-knot | polygon | file:path (default torus:2,3)",
    )
    common.add_argument("--noise", type=float, help="Uniform vertex noise amplitude")
    common.add_argument("--seed", type=int, help="Noise seed (default 0)")
    common.add_argument("--threads", type=int, help="Worker threads for the energy")
    common.add_argument("--out", help="Output directory (default: out)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="mengerflow",
        description="MengerFlow: Sobolev gradient flow of Menger curvature for knots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser(
        "generate", parents=[common], help="Write an initial curve to OBJ"
    )
    generate.add_argument(
        "output", nargs="?", help="OBJ file to write (default: <out>/initial.obj)"
    )
    generate.add_argument(
        "--save-plot", metavar="FILENAME", help="Also draw the curve to an image"
    )

    flow = sub.add_parser("flow", parents=[common], help="Run the gradient flow")
    flow.add_argument("--sigma", type=float, help="Armijo constant (default 1e-4)")
    flow.add_argument("--tol-feas", type=float, help="Strain tolerance (default 1e-8)")
    flow.add_argument(
        "--tol-grad", type=float, help="Relative gradient tolerance (default 1e-6)"
    )
    flow.add_argument("--max-iters", type=int, help="Accepted-step budget")
    flow.add_argument(
        "--frame-every", type=int, help="Write a frame every k accepted steps"
    )
    flow.add_argument(
        "--no-isotopy-check",
        action="store_true",
        default=None,
        help="Skip the homotopy certificate of each step",
    )
    flow.add_argument(
        "--no-wall-time",
        action="store_true",
        default=None,
        help="Write 0 in the wall_ms column (byte-reproducible traces)",
    )
    flow.add_argument("--formats", help="Comma separated subset of obj,csv")
    flow.add_argument(
        "--save-plot", metavar="FILENAME", help="Plot energy and ‖g‖_J to a file"
    )

    for name, text in (
        ("energy", "Print the energy of a curve"),
        ("diagnose", "Print geometric and energetic diagnostics"),
    ):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument(
            "curve_file", nargs="?", help="OBJ curve (default: --curve selection)"
        )
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) with the command-line flags."""
    values: dict[str, Any] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for dest, value in vars(args).items():
        if dest in _NON_CONFIG or value is None:
            continue
        values[dest] = value
    cfg = build_run_config(values)
    logger.debug("run configuration: %s", cfg.model_dump_json())
    return cfg


def _load_curve(args: argparse.Namespace, cfg: RunConfig) -> Polyline:
    if getattr(args, "curve_file", None):
        return read_obj(args.curve_file)
    return cfg.initial_curve()


def cmd_generate(args: argparse.Namespace, cfg: RunConfig) -> int:
    P = cfg.initial_curve()
    if args.output:
        target = Path(args.output)
    else:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        target = cfg.output_dir / "initial.obj"
    write_obj(P, target)
    print(f"Wrote {P.n_vertices}-vertex {cfg.curve} to '{target}'")
    if args.save_plot and not plot_curve(P, args.save_plot):
        return 1
    return 0


def cmd_flow(args: argparse.Namespace, cfg: RunConfig) -> int:
    P0 = cfg.initial_curve()
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_frames = "obj" in cfg.formats and cfg.frame_every > 0

    if write_frames:
        write_frame(P0, out, 0)

    def on_step(state: FlowState) -> None:
        if write_frames and state.iter % cfg.frame_every == 0:
            write_frame(state.P, out, state.iter)

    result = run_flow(P0, cfg.energy, cfg.flow, on_step=on_step)

    if "csv" in cfg.formats:
        write_trace_csv(result, out / "trace.csv")
    if "obj" in cfg.formats:
        write_obj(result.final, out / "final.obj")

    final = result.trace[-1]
    print(f"Stopped: {result.stop_reason} after {result.accepted_steps} steps")
    print(f"  energy: {result.trace[0].energy:.12e} -> {final.energy:.12e}")
    print(f"  grad_norm_J: {final.grad_norm_J:.6e}")
    print(f"  isotopy rejections: {result.isotopy_rejections}")
    print(f"  final curve embedded: {is_embedded(result.final)}")
    print(f"Output written to '{out}'")

    if cfg.save_plot is not None and not plot_trace(
        result.to_dataframe(), cfg.save_plot
    ):
        return 1
    return 0


def cmd_energy(args: argparse.Namespace, cfg: RunConfig) -> int:
    P = _load_curve(args, cfg)
    report = energy_differential(P, cfg.energy)
    print(f"energy: {report.value!r}")
    print(f"triple_count: {report.triple_count}")
    print(f"differential_norm: {report.norm!r}")
    return 0


def _format_value(value: Any) -> str:
    if isinstance(value, list | np.ndarray):
        return " ".join(repr(float(x)) for x in value)
    return repr(value)


def cmd_diagnose(args: argparse.Namespace, cfg: RunConfig) -> int:
    P = _load_curve(args, cfg)
    diagnostics = geometry_diagnostics(P)
    J = assemble_gagliardo(P, cfg.energy)
    evaluation = projected_gradient(P, cfg.energy, J)

    rows: list[tuple[str, Any]] = [
        ("vertices", P.n_vertices),
        ("energy", evaluation.report.value),
        ("seminorm", discrete_seminorm(J, P.points)),
        ("bilipschitz", diagnostics.bilipschitz),
        ("min_edge_length", diagnostics.min_edge_length),
        ("max_edge_length", diagnostics.max_edge_length),
        ("max_turning_angle", diagnostics.max_turning_angle),
        ("total_length", diagnostics.total_length),
        ("barycenter", diagnostics.barycenter),
        ("theta_min_eigenvalue", diagnostics.theta_min_eigenvalue),
        ("grad_norm_J", evaluation.norm_J),
        ("differential_norm", evaluation.report.norm),
        ("embedded", is_embedded(P)),
    ]
    for key, value in rows:
        print(f"{key}: {_format_value(value)}")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "flow": cmd_flow,
    "energy": cmd_energy,
    "diagnose": cmd_diagnose,
}


def main(argv: list[str] | None = None) -> int:
    """Entry point of the ``mengerflow`` command.

    Returns:
        int: Exit code (0 for success, 1 for error) suitable for sys.exit().
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](args, cfg)
    except (MengerFlowError, ValueError, OSError) as e:
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
