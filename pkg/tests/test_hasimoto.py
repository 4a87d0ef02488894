import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.core.errors import DomainValidationError, RefinementError
from src.schemas.ansatz import AnsatzField
from src.schemas.frame import Frame, FrameField, SpaceGrid
from src.schemas.geometry import PolyLine
from src.services import ansatz, hasimoto, selfsimilar
from src.services.geometry import polyline_point, polyline_tangent
from src.utils.linalg import orthonormality_defect


@pytest.fixture
def pair_frames(pair_field: AnsatzField) -> FrameField:
    t = 0.05
    grid = hasimoto.resolved_grid(pair_field, t, 2.0)
    return hasimoto.integrate_frame_in_space(pair_field, t, Frame.canonical(), grid)


def test_frames_stay_orthonormal(pair_frames: FrameField) -> None:
    assert float(orthonormality_defect(pair_frames.frames).max()) < 1e-9
    dets = np.linalg.det(pair_frames.frames)
    assert np.allclose(dets, 1.0, atol=1e-9)


def test_tangent_derivative_modulus_is_curvature(pair_field: AnsatzField, pair_frames: FrameField) -> None:
    u = ansatz.eval_u(pair_field, pair_frames.t, pair_frames.x)
    assert np.allclose(np.linalg.norm(pair_frames.tx, axis=1), np.abs(u), rtol=0.0, atol=1e-9)


def test_frame_energy_equals_mass_density(pair_field: AnsatzField, pair_frames: FrameField) -> None:
    u = ansatz.eval_u(pair_field, pair_frames.t, pair_frames.x)
    expected = float(np.trapezoid(np.abs(u) ** 2, pair_frames.x))
    assert hasimoto.frame_energy(pair_frames) == pytest.approx(expected, rel=1e-8)


def test_resolved_grid_keeps_origin(pair_field: AnsatzField) -> None:
    grid = hasimoto.resolved_grid(pair_field, 1e-3, 1.5)
    nodes = grid.nodes()
    assert np.min(np.abs(nodes)) < 1e-12
    k_max = hasimoto.local_wavenumber(pair_field, 1e-3, -1.5, 1.5)
    assert k_max * grid.dx <= 0.5 + 1e-12


def test_single_corner_matches_selfsimilar(corner_field: AnsatzField) -> None:
    t = 0.01
    alpha = float(corner_field.alphas[0].real)
    grid = hasimoto.resolved_grid(corner_field, t, 1.0)
    frames = hasimoto.integrate_frame_in_space(corner_field, t, Frame.canonical(), grid)
    profile = selfsimilar.integrate_profile(alpha, y_max=50.0)
    _, tangents = selfsimilar.selfsimilar_state(t, frames.x, alpha, profile)
    assert float(np.max(np.linalg.norm(frames.T - tangents, axis=1))) < 5e-3


def test_undersampled_grid_is_rejected(pair_field: AnsatzField) -> None:
    grid = SpaceGrid(x_min=-2.0, x_max=2.0, dx=0.5)
    with pytest.raises(RefinementError) as info:
        hasimoto.integrate_frame_in_space(pair_field, 1e-3, Frame.canonical(), grid)
    assert info.value.suggested_step < 0.5


def test_grid_must_contain_anchor(pair_field: AnsatzField) -> None:
    grid = SpaceGrid(x_min=0.25, x_max=1.25, dx=0.5)
    with pytest.raises(DomainValidationError):
        hasimoto.integrate_frame_in_space(pair_field, 10.0, Frame.canonical(), grid)


def test_time_march_is_reversible(pair_field: AnsatzField) -> None:
    start = Frame.canonical()
    back = hasimoto.integrate_frame_in_time(
        pair_field, 0.3, hasimoto.integrate_frame_in_time(pair_field, 0.3, start, 0.1, 0.05), 0.05, 0.1
    )
    assert np.max(np.abs(back.matrix() - np.eye(3))) < 1e-5


def test_time_march_zero_span(pair_field: AnsatzField) -> None:
    frame, stats = hasimoto.march_time_with_stats(pair_field, 0.0, Frame.canonical(), 0.1, 0.1)
    assert stats.steps == 0
    assert np.allclose(frame.matrix(), np.eye(3))


def test_time_steps_are_uniform_in_inverse_time(pair_field: AnsatzField) -> None:
    _, short = hasimoto.march_time_with_stats(pair_field, 0.0, Frame.canonical(), 1.0, 0.01)
    _, long = hasimoto.march_time_with_stats(pair_field, 0.0, Frame.canonical(), 1.0, 0.005)
    assert long.steps / short.steps == pytest.approx(199.0 / 99.0, rel=1e-3)
    ds = 199.0 / long.steps
    # h = t^2 ds, so the M/t rotation turns N by at most M t ds / 2 per step
    assert 0.5 * pair_field.mass * ds * 1.0 < 0.1
    assert long.max_drift < 1e-8


def test_single_corner_paths_commute(corner_field: AnsatzField) -> None:
    defect = hasimoto.compatibility_defect(corner_field, Frame.canonical(), 0.1, 0.05, 0.0, 0.5)
    assert defect < 1e-4


def test_negative_time_rejected(pair_field: AnsatzField) -> None:
    with pytest.raises(DomainValidationError):
        hasimoto.integrate_frame_in_time(pair_field, 0.0, Frame.canonical(), 0.1, -1.0)


def test_polyline_field_and_curve(right_angle_pair: PolyLine) -> None:
    x = np.linspace(-3.0, 3.0, 601)
    field = hasimoto.polyline_field(right_angle_pair, x)
    assert float(orthonormality_defect(field.frames).max()) < 1e-12
    assert np.allclose(field.T, polyline_tangent(right_angle_pair, x))
    curve = hasimoto.reconstruct_curve(field, (0.0, np.zeros(3)))
    assert np.allclose(curve.points, polyline_point(right_angle_pair, x), atol=2 * field.dx)
    assert hasimoto.polyline_limit_error(0.0, right_angle_pair, field) == 0.0


def test_alignment_undoes_rotation(right_angle_pair: PolyLine) -> None:
    x = np.linspace(-3.0, 3.0, 301)
    field = hasimoto.polyline_field(right_angle_pair, x)
    rotvec = np.array([0.1, 0.2, 0.3])
    turned = field.rotated(Rotation.from_rotvec(rotvec).as_matrix())
    aligned, report = hasimoto.align_to_polyline(turned, right_angle_pair)
    assert report.segments == 3
    assert report.rmsd < 1e-10
    assert report.angle == pytest.approx(math.sqrt(0.14), abs=1e-8)
    assert np.allclose(aligned.T, field.T, atol=1e-10)


def test_anchor_moves_along_straight_line(corner_field: AnsatzField) -> None:
    # at the corner chi(t, 0) - chi(0, 0) = 2 alpha sqrt(t) b(0)
    alpha = float(abs(corner_field.alphas[0]))
    start = np.zeros(3)
    point, frame = hasimoto.evolve_anchor(corner_field, 0.0, Frame.canonical(), start, 0.05, 0.1)
    expected = 2.0 * alpha * (math.sqrt(0.1) - math.sqrt(0.05))
    assert np.linalg.norm(point) == pytest.approx(expected, rel=5e-3)
    back, _ = hasimoto.evolve_anchor(corner_field, 0.0, frame, point, 0.1, 0.05)
    assert np.linalg.norm(back - start) < 1e-5


def test_anchor_zero_span(corner_field: AnsatzField) -> None:
    start = np.array([1.0, 2.0, 3.0])
    point, frame = hasimoto.evolve_anchor(corner_field, 0.0, Frame.canonical(), start, 0.1, 0.1)
    assert np.array_equal(point, start)
    assert np.allclose(frame.matrix(), np.eye(3))


def test_four_corner_limit_matches_twisted_polyline(four_corners: PolyLine) -> None:
    field = ansatz.make_field(four_corners.corners)
    t = 5e-4
    grid = hasimoto.resolved_grid(field, t, 4.0)
    frames = hasimoto.integrate_frame_in_space(field, t, Frame.canonical(), grid)
    aligned, report = hasimoto.align_to_polyline(frames, four_corners)
    assert report.segments == 5
    assert report.rmsd < 3e-2

    measured, _ = hasimoto.measured_directions(aligned, four_corners)
    normals = np.cross(measured[:-1], measured[1:])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    dots = np.sum(normals[:-1] * normals[1:], axis=1)
    expected = [math.cos(tw) for tw in four_corners.twists]
    assert dots == pytest.approx(expected, abs=1e-2)


def test_polyline_limit_error_decays_like_sqrt_t(right_angle_pair: PolyLine, pair_field: AnsatzField) -> None:
    errors = []
    for t in (1e-4, 2.5e-5):
        grid = hasimoto.resolved_grid(pair_field, t, 2.0)
        frames = hasimoto.integrate_frame_in_space(pair_field, t, Frame.canonical(), grid)
        errors.append(hasimoto.polyline_limit_error(t, right_angle_pair, frames, margin=0.1))
    # t уменьшилось в 4 раза - ошибка примерно вдвое
    assert 1.5 < errors[0] / errors[1] < 2.7


def test_single_corner_curve_stays_within_bound(single_corner: PolyLine, corner_field: AnsatzField) -> None:
    t = 1e-3
    alpha = float(abs(corner_field.alphas[0]))
    grid = hasimoto.resolved_grid(corner_field, t, 1.0)
    frames = hasimoto.integrate_frame_in_space(corner_field, t, Frame.canonical(), grid)
    aligned, _ = hasimoto.align_to_polyline(frames, single_corner)
    origin = int(np.argmin(np.abs(aligned.x)))
    anchor = 2.0 * alpha * math.sqrt(t) * aligned.frames[origin, :, 2]
    curve = hasimoto.reconstruct_curve(aligned, (float(aligned.x[origin]), anchor))
    distance = np.linalg.norm(curve.points - polyline_point(single_corner, aligned.x), axis=1)
    bound = 2.0 * alpha * math.sqrt(t)
    assert distance[origin] == pytest.approx(bound, rel=1e-12)
    assert float(distance.max()) < 1.1 * bound
