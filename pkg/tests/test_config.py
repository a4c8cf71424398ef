"""Tests for the run configuration and the config file loader."""

from pathlib import Path

import pytest

from mengerflow.config import (
    CurveSpec,
    RunConfig,
    build_run_config,
    load_config_file,
    normalize_key,
)
from mengerflow.curve_io import write_obj
from mengerflow.errors import InvalidParams, IoError, ParseError

CONFIG_TEXT = """\
# trefoil run
p = 2.4
n = 32             # vertices
curve = torus:2,5
max_iters = 12
no-isotopy-check = true

formats = csv
"""


@pytest.fixture
def config_file(tmp_path) -> Path:
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT)
    return path


class TestConfigFile:
    def test_load(self, config_file):
        values = load_config_file(config_file)
        assert values == {
            "p": "2.4",
            "n": "32",
            "curve": "torus:2,5",
            "max-iters": "12",
            "isotopy-check": False,
            "formats": "csv",
        }

    def test_build_from_file(self, config_file):
        cfg = build_run_config(load_config_file(config_file))
        assert cfg.energy.p == 2.4
        assert cfg.n_edges == 32
        assert cfg.curve == CurveSpec(kind="torus", a=2, b=5)
        assert cfg.flow.max_iters == 12
        assert cfg.flow.isotopy_check is False
        assert cfg.formats == ["csv"]

    def test_flags_override_file(self, config_file):
        values = load_config_file(config_file)
        cfg = build_run_config({**values, "n": 20, "max_iters": None})
        assert cfg.n_edges == 20
        assert cfg.flow.max_iters == 12

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError, match="File not found"):
            load_config_file(tmp_path / "absent.cfg")

    def test_line_without_value(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("p = 2.5\nmax-iters\n")
        with pytest.raises(ParseError, match="bad.cfg:2"):
            load_config_file(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("learning_rate = 0.1\n")
        with pytest.raises(InvalidParams, match="learning-rate"):
            load_config_file(path)


class TestBuildRunConfig:
    def test_defaults(self):
        cfg = build_run_config({})
        assert cfg == RunConfig()
        assert cfg.n_edges == 48
        assert cfg.energy.p == 2.5
        assert str(cfg.curve) == "torus:2,3"
        assert cfg.formats == ["obj", "csv"]

    def test_too_few_vertices(self):
        with pytest.raises(InvalidParams, match="n_edges"):
            build_run_config({"n": 2})

    def test_energy_exponent_out_of_range(self):
        with pytest.raises(InvalidParams, match="p must lie in"):
            build_run_config({"p": 3.0})

    def test_exponent_allowed_on_request(self):
        cfg = build_run_config({"p": 3.0, "allow-outside-range": True})
        assert cfg.energy.p == 3.0

    def test_negated_flags(self):
        cfg = build_run_config({"no_isotopy_check": True, "no_wall_time": True})
        assert cfg.flow.isotopy_check is False
        assert cfg.record_wall_time is False
        assert cfg.flow.record_wall_time is False

    def test_threads_reach_the_energy(self):
        cfg = build_run_config({"threads": 4})
        assert cfg.energy.workers == 4

    def test_unknown_format(self):
        with pytest.raises(InvalidParams, match="formats"):
            build_run_config({"formats": "obj,vtk"})

    def test_normalize_key(self):
        assert normalize_key("--max_iters") == "max-iters"
        assert normalize_key(" Tol-Feas ") == "tol-feas"


class TestCurveSpec:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("torus", CurveSpec(kind="torus", a=2, b=3)),
            ("torus:3,4", CurveSpec(kind="torus", a=3, b=4)),
            ("square-knot", CurveSpec(kind="square-knot")),
            ("polygon", CurveSpec(kind="polygon")),
            ("file:knots/k.obj", CurveSpec(kind="file", path=Path("knots/k.obj"))),
        ],
    )
    def test_parse(self, text, expected):
        assert CurveSpec.parse(text) == expected

    @pytest.mark.parametrize("text", ["torus:2", "figure-eight", "file:", "polygon:5"])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidParams):
            CurveSpec.parse(text)

    def test_round_trip_through_text(self):
        curve = CurveSpec(kind="torus", a=2, b=5)
        assert CurveSpec.parse(str(curve)) == curve

    def test_build_with_noise(self):
        cfg = build_run_config({"curve": "polygon", "n": 12, "noise": 0.05, "seed": 1})
        P = cfg.initial_curve()
        assert P.n_vertices == 12
        again = cfg.initial_curve()
        assert (P.points == again.points).all()

    def test_build_from_file(self, tmp_path, unit_square):
        path = write_obj(unit_square, tmp_path / "square.obj")
        cfg = build_run_config({"curve": f"file:{path}", "n": 99})
        assert cfg.initial_curve().n_vertices == 4
