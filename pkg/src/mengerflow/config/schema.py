"""Run configuration schemas and the key=value config file loader.

A run is described by a single :class:`RunConfig` that nests the energy
parameters and the flow configuration next to the curve selection and the
output options. Values come from two sources, applied in order:

    1. an optional plain-text config file (``key = value`` per line, ``#``
       starts a comment, keys are the command-line flag names with ``-`` or
       ``_``),
    2. command-line flags, which override the file.

Example:
    >>> values = load_config_file("trefoil.cfg")
    >>> cfg = build_run_config({**values, "max-iters": 50})
    >>> cfg.flow.max_iters
    50
"""

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..curve_io import read_obj
from ..energy import EnergyParams
from ..errors import InvalidParams, IoError, ParseError
from ..flow import FlowConfig
from ..geometry.generators import (
    add_vertex_noise,
    generate_square_knot,
    generate_torus_knot,
    regular_polygon,
)
from ..geometry.models import Polyline

logger = logging.getLogger(__name__)

CurveKind = Literal["torus", "square-knot", "polygon", "file"]
OutputFormat = Literal["obj", "csv"]


class CurveSpec(BaseModel):
    """Initial curve selection.

    Parsed from ``torus:a,b``, ``square-knot``, ``polygon`` or ``file:path``.
    """

    kind: CurveKind = "torus"
    a: int = 2
    b: int = 3
    path: Path | None = None

    @model_validator(mode="after")
    def _validate_kind(self) -> "CurveSpec":
        if self.kind == "file" and self.path is None:
            raise ValueError("curve kind 'file' needs a path")
        return self

    @classmethod
    def parse(cls, text: str) -> "CurveSpec":
        kind, _, arg = text.strip().partition(":")
        if kind == "torus":
            if not arg:
                return cls(kind="torus")
            try:
                a, b = (int(x) for x in arg.split(","))
            except ValueError as e:
                raise InvalidParams(
                    f"torus curve must be given as torus:a,b, got {text!r}"
                ) from e
            return cls(kind="torus", a=a, b=b)
        if kind in ("square-knot", "polygon") and not arg:
            return cls(kind=kind)
        if kind == "file" and arg:
            return cls(kind="file", path=Path(arg))
        raise InvalidParams(
            f"unknown curve {text!r}; expected torus:a,b, square-knot, polygon "
            "or file:path"
        )

    def __str__(self) -> str:
        if self.kind == "torus":
            return f"torus:{self.a},{self.b}"
        if self.kind == "file":
            return f"file:{self.path}"
        return self.kind

    def build(self, n_edges: int) -> Polyline:
        """Generate the curve (files keep their own vertex count)."""
        if self.kind == "torus":
            return generate_torus_knot(self.a, self.b, n_edges)
        if self.kind == "square-knot":
            return generate_square_knot(n_edges)
        if self.kind == "polygon":
            return regular_polygon(n_edges)
        assert self.path is not None
        return read_obj(self.path)


class RunConfig(BaseModel):
    """Complete configuration of a command-line run.

    ``threads`` and ``record_wall_time`` are copied into the nested energy
    and flow configurations.
    """

    energy: EnergyParams = Field(default_factory=EnergyParams)
    flow: FlowConfig = Field(default_factory=FlowConfig)
    n_edges: int = Field(48, ge=3, description="Number of vertices N")
    curve: CurveSpec = Field(default_factory=CurveSpec)
    noise: float = Field(0.0, ge=0.0, description="Uniform vertex noise amplitude")
    seed: int = Field(0, ge=0)
    output_dir: Path = Path("out")
    frame_every: int = Field(0, ge=0, description="0 writes no frames")
    formats: list[OutputFormat] = Field(default_factory=lambda: ["obj", "csv"])
    threads: int = Field(1, ge=1)
    record_wall_time: bool = True
    save_plot: Path | None = None

    @model_validator(mode="after")
    def _propagate_shared(self) -> "RunConfig":
        if self.energy.workers != self.threads:
            self.energy = self.energy.model_copy(update={"workers": self.threads})
        if self.flow.record_wall_time != self.record_wall_time:
            self.flow = self.flow.model_copy(
                update={"record_wall_time": self.record_wall_time}
            )
        return self

    def initial_curve(self) -> Polyline:
        """Build the selected curve and apply the seeded vertex noise."""
        return add_vertex_noise(self.curve.build(self.n_edges), self.noise, self.seed)


# config key -> (section, field); section None targets RunConfig itself
_KEYS: dict[str, tuple[str | None, str]] = {
    "p": ("energy", "p"),
    "allow-outside-range": ("energy", "allow_outside_range"),
    "degenerate-threshold": ("energy", "degenerate_threshold"),
    "sigma": ("flow", "sigma_armijo"),
    "backtrack": ("flow", "backtrack_factor"),
    "step-grow": ("flow", "step_grow_factor"),
    "tau-init": ("flow", "tau_init"),
    "tau-min": ("flow", "tau_min"),
    "tol-feas": ("flow", "tol_feas"),
    "max-newton": ("flow", "max_newton"),
    "tol-grad": ("flow", "tol_grad"),
    "tol-critical": ("flow", "tol_critical"),
    "max-iters": ("flow", "max_iters"),
    "isotopy-check": ("flow", "isotopy_check"),
    "angle-margin": ("flow", "angle_margin"),
    "edge-floor": ("flow", "edge_floor"),
    "turning-samples": ("flow", "turning_samples"),
    "collision-tol": ("flow", "collision_tol"),
    "n": (None, "n_edges"),
    "curve": (None, "curve"),
    "noise": (None, "noise"),
    "seed": (None, "seed"),
    "out": (None, "output_dir"),
    "frame-every": (None, "frame_every"),
    "formats": (None, "formats"),
    "threads": (None, "threads"),
    "wall-time": (None, "record_wall_time"),
    "save-plot": (None, "save_plot"),
}

# negated flags map onto the positive key
_NEGATED = {"no-isotopy-check": "isotopy-check", "no-wall-time": "wall-time"}

_FALSE = {"false", "no", "off", "0"}


def normalize_key(key: str) -> str:
    """Canonical config key: lower case, ``-`` separated, no leading dashes."""
    return key.strip().lstrip("-").lower().replace("_", "-")


def _canonical(key: str, value: Any) -> tuple[str, Any]:
    key = normalize_key(key)
    if key in _NEGATED:
        positive = str(value).strip().lower() in _FALSE
        return _NEGATED[key], positive
    if key not in _KEYS:
        raise InvalidParams(f"unknown configuration key {key!r}")
    return key, value


def load_config_file(filepath: str | Path) -> dict[str, Any]:
    """Read a ``key = value`` configuration file.

    Returns:
        dict[str, Any]: Canonical keys mapped to their raw string values

    Raises:
        IoError: If the file does not exist or cannot be read
        ParseError: If a line is not of the form ``key = value``
        InvalidParams: If a key is unknown
    """
    filepath = Path(filepath)
    if not filepath.exists():
        raise IoError(f"File not found: {filepath}")
    try:
        text = filepath.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"Failed to read {filepath}: {e}") from e

    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"{filepath}:{lineno}: expected 'key = value'")
        canonical, parsed = _canonical(key, value.strip())
        values[canonical] = parsed
    logger.debug("loaded %d settings from %s", len(values), filepath)
    return values


def build_run_config(values: Mapping[str, Any]) -> RunConfig:
    """Assemble a validated RunConfig from flat key/value settings.

    ``None`` values are skipped, so unset command-line flags leave file values
    and defaults in place.

    Raises:
        InvalidParams: If a key is unknown or a value fails validation
    """
    sections: dict[str, dict[str, Any]] = {"energy": {}, "flow": {}}
    top: dict[str, Any] = {}
    for raw_key, raw_value in values.items():
        if raw_value is None:
            continue
        key, value = _canonical(raw_key, raw_value)
        section, field = _KEYS[key]
        if field == "curve" and not isinstance(value, CurveSpec):
            value = CurveSpec.parse(str(value))
        elif field == "formats" and isinstance(value, str):
            value = [f.strip() for f in value.split(",") if f.strip()]
        if section is None:
            top[field] = value
        else:
            sections[section][field] = value

    try:
        return RunConfig(
            energy=EnergyParams(**sections["energy"]),
            flow=FlowConfig(**sections["flow"]),
            **top,
        )
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        raise InvalidParams(f"invalid {location}: {first['msg']}") from e
