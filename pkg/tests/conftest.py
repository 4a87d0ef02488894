import math

import pytest

from src.schemas.ansatz import AnsatzField
from src.schemas.geometry import PolyLine
from src.services import ansatz
from src.services.geometry import build_polyline, corners_from_angle, symmetric_positions


def polyline(theta: float, positions: list[int]) -> PolyLine:
    return build_polyline(corners_from_angle(theta, positions))


@pytest.fixture
def right_angle_pair() -> PolyLine:
    """Два угла pi/2 в -1 и 1."""
    return polyline(math.pi / 2, [-1, 1])


@pytest.fixture
def single_corner() -> PolyLine:
    return polyline(math.pi / 2, [0])


@pytest.fixture
def four_corners() -> PolyLine:
    return polyline(math.pi / 2, symmetric_positions(2))


@pytest.fixture
def pair_field(right_angle_pair: PolyLine) -> AnsatzField:
    return ansatz.make_field(right_angle_pair.corners)


@pytest.fixture
def corner_field(single_corner: PolyLine) -> AnsatzField:
    return ansatz.make_field(single_corner.corners)
