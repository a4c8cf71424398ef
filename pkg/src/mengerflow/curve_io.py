"""Curve and trace file input/output.

Formats:
    - OBJ polylines: one ``v x y z`` record per vertex (shortest round-trip
      float repr) and a single ``l 1 2 ... N 1`` record. The repeated first
      index marks the curve as closed; open polylines are rejected.
    - Trace CSV: the columns of :data:`mengerflow.flow.TRACE_COLUMNS`, numeric
      values in scientific notation with 17 significant digits.

Every reader wraps a missing file in :class:`IoError` and every malformed
record in :class:`ParseError`, so callers only need to handle the library's
own exceptions.

Example:
    >>> from mengerflow.geometry import generate_torus_knot
    >>> write_obj(generate_torus_knot(2, 3, 48), "trefoil.obj")
    >>> read_obj("trefoil.obj").n_vertices
    48
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import IoError, ParseError
from .flow import TRACE_COLUMNS, FlowResult
from .geometry.models import Polyline

logger = logging.getLogger(__name__)

FRAME_PATTERN = "frame_{:06d}.obj"


def format_obj(P: Polyline) -> str:
    """Render a closed polyline as OBJ text."""
    lines = [f"# mengerflow polyline, {P.n_vertices} vertices"]
    for point in P.points:
        lines.append("v " + " ".join(repr(float(x)) for x in point))
    indices = [*range(1, P.n_vertices + 1), 1]
    lines.append("l " + " ".join(str(i) for i in indices))
    return "\n".join(lines) + "\n"


def write_obj(P: Polyline, filepath: str | Path) -> Path:
    """Write a closed polyline to an OBJ file.

    Raises:
        IoError: If the file cannot be written
    """
    filepath = Path(filepath)
    try:
        filepath.write_text(format_obj(P), encoding="utf-8")
    except OSError as e:
        raise IoError(f"Failed to write {filepath}: {e}") from e
    return filepath


def parse_obj(text: str, source: str = "<string>") -> Polyline:
    """Parse OBJ text holding exactly one closed polyline.

    Only ``v`` and ``l`` records are interpreted; comments, blank lines and
    other record types are ignored. Vertices are reordered to follow the
    ``l`` record. The result lives on the uniform partition.

    Raises:
        ParseError: If a record is malformed, the polyline is missing, not
            closed, or does not visit every vertex exactly once
    """
    vertices: list[list[float]] = []
    polylines: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split("#", 1)[0].split()
        if not fields:
            continue
        try:
            if fields[0] == "v":
                vertices.append([float(x) for x in fields[1:]])
            elif fields[0] == "l":
                polylines.append([int(i) for i in fields[1:]])
        except ValueError as e:
            raise ParseError(f"{source}:{lineno}: malformed record: {e}") from e

    if not vertices:
        raise ParseError(f"{source}: no vertices")
    if len({len(v) for v in vertices}) != 1 or len(vertices[0]) < 2:
        raise ParseError(f"{source}: vertices must share a dimension of at least 2")
    if len(polylines) != 1:
        raise ParseError(f"{source}: expected one 'l' record, found {len(polylines)}")

    indices = polylines[0]
    if len(indices) < 2 or indices[0] != indices[-1]:
        raise ParseError(f"{source}: polyline is not closed")
    order = np.asarray(indices[:-1]) - 1
    n_vertices = len(vertices)
    if sorted(order.tolist()) != list(range(n_vertices)):
        raise ParseError(
            f"{source}: polyline must visit each of the {n_vertices} vertices once"
        )
    points = np.asarray(vertices, dtype=float)[order]
    try:
        return Polyline.from_points(points)
    except ValueError as e:
        raise ParseError(f"{source}: {e}") from e


def read_obj(filepath: str | Path) -> Polyline:
    """Load a closed polyline from an OBJ file.

    Raises:
        IoError: If the file does not exist or cannot be read
        ParseError: If the contents are not a single closed polyline
    """
    filepath = Path(filepath)
    if not filepath.exists():
        raise IoError(f"File not found: {filepath}")
    try:
        text = filepath.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"Failed to read {filepath}: {e}") from e
    return parse_obj(text, source=str(filepath))


def write_frame(P: Polyline, output_dir: str | Path, index: int) -> Path:
    """Write ``frame_{index:06d}.obj`` into ``output_dir``."""
    return write_obj(P, Path(output_dir) / FRAME_PATTERN.format(index))


def trace_dataframe(trace: FlowResult | pd.DataFrame) -> pd.DataFrame:
    if isinstance(trace, FlowResult):
        return trace.to_dataframe()
    missing = [c for c in TRACE_COLUMNS if c not in trace.columns]
    if missing:
        raise ParseError(f"trace is missing columns {missing}")
    return trace[TRACE_COLUMNS]


def write_trace_csv(trace: FlowResult | pd.DataFrame, filepath: str | Path) -> Path:
    """Write the flow trace as plain CSV.

    Raises:
        IoError: If the file cannot be written
    """
    filepath = Path(filepath)
    df = trace_dataframe(trace)
    try:
        df.to_csv(filepath, index=False, float_format="%.16e", lineterminator="\n")
    except OSError as e:
        raise IoError(f"Failed to write {filepath}: {e}") from e
    logger.debug("wrote %d trace rows to %s", len(df), filepath)
    return filepath


def read_trace_csv(filepath: str | Path) -> pd.DataFrame:
    """Load a trace written by :func:`write_trace_csv`.

    Raises:
        IoError: If the file does not exist
        ParseError: If the file is not a trace table
    """
    filepath = Path(filepath)
    if not filepath.exists():
        raise IoError(f"File not found: {filepath}")
    try:
        df = pd.read_csv(filepath)
    except Exception as e:
        raise ParseError(f"Failed to parse {filepath}: {e}") from e
    return trace_dataframe(df)
