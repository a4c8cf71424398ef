"""Shared curves for the MengerFlow test suite."""

import numpy as np
import pytest

from mengerflow.energy import EnergyParams
from mengerflow.geometry import (
    Polyline,
    add_vertex_noise,
    generate_torus_knot,
    regular_polygon,
)


@pytest.fixture
def unit_square() -> Polyline:
    return Polyline.from_points(
        np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    )


@pytest.fixture
def trefoil() -> Polyline:
    return generate_torus_knot(2, 3, 24)


@pytest.fixture
def noisy_octagon() -> Polyline:
    return add_vertex_noise(regular_polygon(8), 0.1, seed=11)


@pytest.fixture
def params() -> EnergyParams:
    return EnergyParams(p=2.5)
