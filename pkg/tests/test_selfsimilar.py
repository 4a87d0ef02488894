import math

import numpy as np
import pytest

from src.core.errors import DomainValidationError, RefinementError
from src.schemas.profile import AsymptoticTangents, ProfileTrajectory
from src.services import selfsimilar
from src.services.geometry import angle_from_alpha
from src.utils.linalg import orthonormality_defect


@pytest.fixture(scope="module")
def profile() -> ProfileTrajectory:
    return selfsimilar.integrate_profile(0.5, y_max=20.0)


def test_profile_grid_is_symmetric(profile: ProfileTrajectory) -> None:
    assert profile.y[0] == pytest.approx(-20.0)
    assert profile.y_max == pytest.approx(20.0)
    assert np.allclose(profile.y, -profile.y[::-1], atol=1e-12)
    assert np.all(np.diff(profile.y) > 0)


def test_profile_frames_orthonormal(profile: ProfileTrajectory) -> None:
    assert float(orthonormality_defect(profile.frames).max()) < 1e-10


def test_profile_starts_canonical(profile: ProfileTrajectory) -> None:
    mid = profile.y.size // 2
    assert profile.y[mid] == 0.0
    assert np.allclose(profile.frames[mid], np.eye(3))
    assert np.allclose(profile.G[mid], [0.0, 0.0, 1.0])


def test_conserved_quantity(profile: ProfileTrajectory) -> None:
    assert selfsimilar.conserved_defect(profile) < 1e-4


def test_profile_equation_residual(profile: ProfileTrajectory) -> None:
    assert selfsimilar.profile_residual(profile, y_abs_max=5.0) < 1e-3


def test_state_at_origin(profile: ProfileTrajectory) -> None:
    t = 0.04
    points, tangents = selfsimilar.selfsimilar_state(t, np.array([0.0]), 0.5, profile)
    assert np.allclose(points[0], [0.0, 0.0, 2 * 0.5 * math.sqrt(t)], atol=1e-12)
    assert np.allclose(tangents[0], [1.0, 0.0, 0.0], atol=1e-12)


def test_state_outside_profile(profile: ProfileTrajectory) -> None:
    with pytest.raises(DomainValidationError):
        selfsimilar.selfsimilar_state(1.0, 25.0, 0.5, profile)
    with pytest.raises(DomainValidationError):
        selfsimilar.selfsimilar_state(0.0, 1.0, 0.5, profile)


@pytest.mark.parametrize("alpha, y_max, dy", [(-0.1, 20.0, None), (0.5, -1.0, None), (0.5, 20.0, -0.1)])
def test_profile_inputs_rejected(alpha: float, y_max: float, dy: float | None) -> None:
    with pytest.raises(DomainValidationError):
        selfsimilar.integrate_profile(alpha, y_max=y_max, dy=dy)


def test_coarse_step_needs_refinement() -> None:
    with pytest.raises(RefinementError) as info:
        selfsimilar.integrate_profile(0.5, y_max=20.0, dy=10.0)
    assert info.value.suggested_step < 10.0


def test_straight_line_profile() -> None:
    traj = selfsimilar.integrate_profile(0.0, y_max=50.0)
    assert np.allclose(traj.T, [1.0, 0.0, 0.0], atol=1e-12)
    assert selfsimilar.corner_angle(selfsimilar.asymptotic_tangents(traj)) == pytest.approx(math.pi, abs=1e-9)


def test_corner_angle_and_initial_curve() -> None:
    tangents = AsymptoticTangents(minus=(1.0, 0.0, 0.0), plus=(0.0, 1.0, 0.0), oscillation=0.0)
    assert selfsimilar.corner_angle(tangents) == pytest.approx(math.pi / 2)
    curve = selfsimilar.initial_curve(tangents, np.array([-2.0, 0.0, 3.0]))
    assert np.allclose(curve, [[-2.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 3.0, 0.0]])


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_angle_law(alpha: float) -> None:
    entry = selfsimilar.angle_law_entry(alpha)
    assert entry.theta_law == pytest.approx(angle_from_alpha(alpha))
    assert entry.abs_err < 5e-3


def test_profile_halves_mirror_each_other() -> None:
    traj = selfsimilar.integrate_profile(0.5, y_max=60.0)
    flip = np.array([1.0, -1.0, -1.0])
    assert np.allclose(traj.T[::-1], traj.T * flip, atol=1e-12)
    assert np.allclose(traj.G[::-1], traj.G * -flip, atol=1e-10)

    tangents = selfsimilar.asymptotic_tangents(traj)
    minus, plus = np.array(tangents.minus), np.array(tangents.plus)
    assert np.allclose(minus, plus * flip, atol=1e-10)
    axis = np.array([1.0, 0.0, 0.0])
    assert abs(float(minus @ axis) - float(plus @ axis)) <= 1e-4
