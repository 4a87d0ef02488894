import math
from collections.abc import Callable
from pathlib import Path

import pytest
from loguru import logger

from src.cli.commands.calibrate import entry_from_passing, merge_entry
from src.core.errors import DomainValidationError
from src.schemas.calibration import Calibration
from src.services import spectral
from src.utils.init_calibration import load_calibration, read_calibration, save_calibration

RIGHT_ANGLE = math.pi / 2


def test_bundled_calibration_loads() -> None:
    calibration = load_calibration()
    assert calibration.tolerances.two_grid_rel == pytest.approx(1e-3)
    assert calibration.tolerances.slope_rel == pytest.approx(0.35)
    assert {e.corners for e in calibration.entries} == {2, 4}


def test_missing_file_gives_empty_calibration(tmp_path: Path) -> None:
    assert read_calibration(tmp_path / "none.yaml").entries == []


def test_invalid_file_rejected(tmp_path: Path) -> None:
    path = tmp_path / "bad.yaml"
    path.write_text("entries:\n- theta: -1.0\n", encoding="utf-8")
    with pytest.raises(DomainValidationError):
        read_calibration(path)


def test_entry_reproduces_passing_range() -> None:
    entry = entry_from_passing(RIGHT_ANGLE, 2, [0.002, 0.003, 0.004], [16, 32])
    assert entry.n_theta == 16
    lo, hi = spectral.admissible_interval(RIGHT_ANGLE, 16, 2, Calibration(entries=[entry]))
    assert lo == pytest.approx(0.002, rel=1e-9)
    assert hi == pytest.approx(0.004, rel=1e-9)


def test_merge_replaces_same_angle(tmp_path: Path) -> None:
    first = entry_from_passing(RIGHT_ANGLE, 2, [0.002, 0.004], [16])
    second = entry_from_passing(RIGHT_ANGLE, 2, [0.003, 0.005], [16])
    other = entry_from_passing(1.0, 2, [0.002, 0.004], [16])
    merged = merge_entry(merge_entry(Calibration(entries=[first, other]), second), second)
    assert [e.theta for e in merged.entries] == [1.0, RIGHT_ANGLE]
    assert merged.entries[1].t_theta == pytest.approx(0.005)

    path = save_calibration(merged, tmp_path / "calibration.yaml")
    assert read_calibration(path) == merged


def test_save_replaces_file_atomically(tmp_path: Path) -> None:
    path = tmp_path / "calibration.yaml"
    path.write_text("entries: []\n", encoding="utf-8")
    calibration = Calibration(entries=[entry_from_passing(RIGHT_ANGLE, 2, [0.002, 0.004], [16])])
    save_calibration(calibration, path)
    assert [p.name for p in tmp_path.iterdir()] == ["calibration.yaml"]
    assert read_calibration(path) == calibration


def warnings_during(func: Callable[[], object]) -> list[str]:
    messages: list[str] = []
    sink_id = logger.add(lambda message: messages.append(message.record["message"]), level="WARNING")
    try:
        func()
    finally:
        logger.remove(sink_id)
    return messages


@pytest.mark.parametrize("theta", [1.5707963267948963, RIGHT_ANGLE, 1.5707963267948970])
def test_rounded_edge_angle_does_not_warn(theta: float) -> None:
    calibration = load_calibration()
    messages = warnings_during(lambda: spectral.calibration_entry(theta, 4, calibration))
    assert not any("outside calibrated range" in m for m in messages)
    assert spectral.calibration_entry(theta, 4, calibration).corners == 4


def test_angle_outside_range_warns() -> None:
    calibration = load_calibration()
    messages = warnings_during(lambda: spectral.calibration_entry(1.6, 4, calibration))
    assert any("outside calibrated range" in m for m in messages)
