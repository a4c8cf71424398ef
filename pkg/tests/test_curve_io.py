"""Tests for OBJ polylines and the trace CSV."""

import re

import numpy as np
import pandas as pd
import pytest

from mengerflow.curve_io import (
    FRAME_PATTERN,
    format_obj,
    parse_obj,
    read_obj,
    read_trace_csv,
    write_frame,
    write_obj,
    write_trace_csv,
)
from mengerflow.errors import IoError, ParseError
from mengerflow.flow import TRACE_COLUMNS
from mengerflow.geometry import add_vertex_noise, generate_torus_knot, regular_polygon

SQUARE_OBJ = """\
# unit square
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
l 1 2 3 4 1
"""


class TestObj:
    def test_write_read_write_is_byte_identical(self, tmp_path):
        P = add_vertex_noise(generate_torus_knot(2, 3, 48), 0.01, seed=5)
        first = write_obj(P, tmp_path / "a.obj")
        loaded = read_obj(first)
        second = write_obj(loaded, tmp_path / "b.obj")
        assert first.read_bytes() == second.read_bytes()
        np.testing.assert_array_equal(loaded.points, P.points)

    def test_layout(self, unit_square):
        lines = format_obj(unit_square).splitlines()
        assert lines[0].startswith("#")
        assert sum(line.startswith("v ") for line in lines) == 4
        assert lines[-1] == "l 1 2 3 4 1"

    def test_parse_square(self):
        P = parse_obj(SQUARE_OBJ)
        assert P.n_vertices == 4
        np.testing.assert_array_equal(P.edge_lengths, np.ones(4))
        assert P.partition.same_as(regular_polygon(4).partition)

    def test_vertices_follow_the_polyline_record(self):
        text = SQUARE_OBJ.replace("l 1 2 3 4 1", "l 2 3 4 1 2")
        P = parse_obj(text)
        np.testing.assert_array_equal(P.points[0], [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(P.points[-1], [0.0, 0.0, 0.0])

    def test_planar_curve(self, tmp_path):
        P = regular_polygon(6, ambient_dim=2)
        loaded = read_obj(write_obj(P, tmp_path / "hexagon.obj"))
        assert loaded.ambient_dim == 2
        np.testing.assert_array_equal(loaded.points, P.points)

    def test_open_polyline_rejected(self):
        with pytest.raises(ParseError, match="not closed"):
            parse_obj(SQUARE_OBJ.replace("l 1 2 3 4 1", "l 1 2 3 4"))

    @pytest.mark.parametrize(
        "text, message",
        [
            ("l 1 2 1\n", "no vertices"),
            ("v 0 0 0\nv 1 0\nl 1 2 1\n", "share a dimension"),
            (SQUARE_OBJ.replace("l 1 2 3 4 1\n", ""), "expected one 'l' record"),
            (SQUARE_OBJ.replace("l 1 2 3 4 1", "l 1 2 2 4 1"), "each of the 4"),
            (SQUARE_OBJ.replace("v 1 1 0", "v 1 one 0"), "malformed record"),
        ],
    )
    def test_malformed_files(self, text, message):
        with pytest.raises(ParseError, match=message):
            parse_obj(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError, match="File not found"):
            read_obj(tmp_path / "missing.obj")

    def test_frames_are_numbered(self, tmp_path, unit_square):
        path = write_frame(unit_square, tmp_path, 7)
        assert path.name == FRAME_PATTERN.format(7) == "frame_000007.obj"
        assert read_obj(path).n_vertices == 4


class TestTraceCsv:
    @pytest.fixture
    def trace(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "iter": [0, 1],
                "energy": [412.5, 398.0000000000001],
                "grad_norm_J": [3.25, 1.0 / 3.0],
                "tau": [0.0, 0.5],
                "feas_violation": [0.0, 2.5e-12],
                "newton_iters": [0, 2],
                "isotopy_pass": [True, True],
                "wall_ms": [0.0, 0.0],
            }
        )

    def test_header_and_number_format(self, tmp_path, trace):
        path = write_trace_csv(trace, tmp_path / "trace.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) == 3
        fields = lines[2].split(",")
        assert fields[0] == "1"
        assert re.fullmatch(r"\d\.\d{16}e[+-]\d{2}", fields[1])
        assert fields[5] == "2"

    def test_values_survive_the_round_trip(self, tmp_path, trace):
        path = write_trace_csv(trace, tmp_path / "trace.csv")
        pd.testing.assert_frame_equal(read_trace_csv(path), trace)

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ParseError, match="missing columns"):
            read_trace_csv(path)
