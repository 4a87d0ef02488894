import math

import numpy as np
import pytest

from src.core.errors import AdmissibilityError, DomainValidationError, RefinementError
from src.schemas.ansatz import AnsatzField
from src.schemas.calibration import Calibration, CalibrationEntry, Tolerances
from src.schemas.frame import Frame, FrameField, SpaceGrid
from src.schemas.geometry import PolyLine
from src.schemas.spectrum import ScanPoint, Spectrum
from src.services import ansatz, hasimoto, spectral
from src.services.geometry import corners_from_angle

RIGHT_ANGLE = math.pi / 2


@pytest.fixture(scope="module")
def pair_field_module() -> AnsatzField:
    return ansatz.make_field(corners_from_angle(RIGHT_ANGLE, [-1, 1]))


@pytest.fixture(scope="module")
def frames(pair_field_module: AnsatzField) -> FrameField:
    grid = SpaceGrid(x_min=-3.0, x_max=3.0, dx=1e-3)
    return hasimoto.integrate_frame_in_space(pair_field_module, 0.05, Frame.canonical(), grid)


def flat_spectrum(t: float, xi: np.ndarray) -> Spectrum:
    values = np.zeros((xi.size, 3), dtype=complex)
    values[:, 0] = 1.0
    zeros = np.zeros(xi.size, dtype=int)
    return Spectrum(t=t, xi=xi, values=values, window_m=zeros, window_sign=zeros, truncation=1.0, taper=0.5)


def test_default_truncation(pair_field: AnsatzField) -> None:
    assert spectral.default_truncation(pair_field.corners) == pytest.approx(7.0)


def test_taper_weights() -> None:
    w = spectral.taper_weights(np.array([0.0, 2.0, 3.0, 4.0, -4.0, 5.0]), 4.0, 2.0)
    assert np.allclose(w, [1.0, 1.0, 0.5, 0.0, 0.0, 0.0], atol=1e-15)


def test_required_step_resolves_phase(pair_field: AnsatzField) -> None:
    t, L = 1e-3, 7.0
    dx = spectral.required_step(pair_field, t, L, 200.0)
    k_max = (L + 1.0) / (2.0 * t)
    assert k_max * dx <= 1.0
    assert L / dx == pytest.approx(round(L / dx), abs=1e-9)


def test_windows() -> None:
    t, n = 0.01, 10
    plus, minus = spectral.xi_window(1, t, n)
    center = 1.0 / (2.0 * math.pi * t)
    assert plus.center == pytest.approx(center)
    assert minus.center == pytest.approx(-center)
    assert plus.radius == pytest.approx(0.1)
    assert plus.contains(center + 0.05)
    assert not plus.contains(center + 0.2)


@pytest.mark.parametrize("m, t", [(0, 0.01), (1, 0.0)])
def test_window_inputs_rejected(m: int, t: float) -> None:
    with pytest.raises(DomainValidationError):
        spectral.xi_window(m, t, 10)


def test_tag_windows() -> None:
    t = 0.01
    c = 1.0 / (2.0 * math.pi * t)
    m, sign = spectral.tag_windows(t, np.array([c, c + 0.05, c + 0.2, -c, 0.0, 2 * c]), 10)
    assert m.tolist() == [1, 1, 0, 1, 0, 2]
    assert sign.tolist() == [1, 1, 0, -1, 0, 1]


def test_offwindow_frequencies_are_off_window() -> None:
    t = 0.02
    xi = np.array(spectral.offwindow_frequencies(t))
    assert spectral.offwindow_mask(t, xi).all()
    c = 1.0 / (2.0 * math.pi * t)
    assert not spectral.offwindow_mask(t, np.array([c, -c])).any()


def test_offwindow_mask_covers_every_order() -> None:
    t = 0.02
    c = 1.0 / (2.0 * math.pi * t)
    centers = np.array([c, -c, 2 * c, -2 * c, 3 * c, -3 * c])
    assert spectral.offwindow_mask(t, centers, m_max=1).tolist() == [False, False, True, True, True, True]
    assert not spectral.offwindow_mask(t, centers, m_max=3).any()

    xi = np.array(spectral.offwindow_frequencies(t, m_max=3))
    assert spectral.offwindow_mask(t, xi, m_max=3).all()
    assert np.allclose(xi[-4:] / c, [0.5, 1.5, 2.5, 3.5])


def test_seeded_offwindow_samples_are_reproducible() -> None:
    t = 0.02
    base = spectral.offwindow_frequencies(t, m_max=3)
    first = spectral.offwindow_frequencies(t, m_max=3, samples=16, seed=7)
    assert first == spectral.offwindow_frequencies(t, m_max=3, samples=16, seed=7)
    assert first != spectral.offwindow_frequencies(t, m_max=3, samples=16, seed=8)
    assert first[: len(base)] == base
    assert len(first) == len(base) + 16
    assert spectral.offwindow_mask(t, np.array(first), m_max=3).all()


def test_resonance_orders(single_corner: PolyLine, right_angle_pair: PolyLine, four_corners: PolyLine) -> None:
    assert spectral.resonance_orders(single_corner.corners) == 1
    assert spectral.resonance_orders(right_angle_pair.corners) == 1
    assert spectral.resonance_orders(four_corners.corners) == 3


def test_resonant_pairs_at_window_center(pair_field: AnsatzField) -> None:
    t, n = 0.01, 10
    xi = 1.0 / (2.0 * math.pi * t)
    assert spectral.resonant_pairs(t, xi, n, pair_field.corners) == [(-1, 1)]
    assert spectral.resonant_pairs(t, -xi, n, pair_field.corners) == [(1, -1)]
    assert spectral.resonant_pairs(t, 0.0, n, pair_field.corners) == [(-1, -1), (1, 1)]


@pytest.mark.parametrize(
    "m, sign, expected",
    [
        (1, 1, [(-3, -1), (-1, 1), (1, 3)]),
        (2, 1, [(-3, 1), (-1, 3)]),
        (1, -1, [(-1, -3), (1, -1), (3, 1)]),
    ],
)
def test_resonant_pairs_for_four_corners(
    four_corners: PolyLine, m: int, sign: int, expected: list[tuple[int, int]]
) -> None:
    t, n = 0.01, 10
    xi = sign * m / (2.0 * math.pi * t)
    assert spectral.resonant_pairs(t, xi, n, four_corners.corners) == expected


def test_single_corner_predictor_vanishes(corner_field: AnsatzField, single_corner: PolyLine) -> None:
    t, n = 0.01, 10
    xi = 1.0 / (2.0 * math.pi * t)
    assert spectral.resonant_pairs(t, xi, n, single_corner.corners) == []
    predicted = spectral.resonant_predictor(t, xi, n, corner_field, single_corner)
    assert np.array_equal(predicted, np.zeros(3, dtype=complex))


def test_transform_kernel_sign() -> None:
    def shifted_gaussian(x: np.ndarray) -> np.ndarray:
        out = np.zeros((x.size, 3))
        out[:, 0] = np.exp(-(x - 1.0) ** 2)
        return out

    xi = np.array([0.0, 0.3, -0.3])
    spectrum = spectral.fourier_transform_Tx(shifted_gaussian, xi, L=8.0, taper=2.0, dx=0.01)
    expected = np.exp(2j * math.pi * xi) * math.sqrt(math.pi) * np.exp(-(math.pi * xi) ** 2)
    assert np.allclose(spectrum.values[:, 0], expected, atol=1e-9)
    assert np.allclose(spectrum.values[:, 1:], 0.0)
    assert spectrum.two_grid_error < 1e-8


def test_sampler_needs_grid() -> None:
    with pytest.raises(DomainValidationError):
        spectral.fourier_transform_Tx(lambda x: np.zeros((x.size, 3)), [0.5], L=2.0)


def test_conjugate_symmetry(frames: FrameField) -> None:
    spectrum = spectral.fourier_transform_Tx(frames, [1.3, -1.3, 4.2, -4.2], check=False)
    v = spectrum.values
    assert np.allclose(v[1], np.conj(v[0]), atol=1e-12)
    assert np.allclose(v[3], np.conj(v[2]), atol=1e-12)


def test_fft_matches_direct_quadrature(frames: FrameField) -> None:
    full = spectral.fft_spectrum(frames, L=3.0, taper=1.0, samples_per_unit=16, xi_max=5.0)
    assert np.all(np.diff(full.xi) > 0)
    picks = np.array([0, full.xi.size // 3, full.xi.size // 2, full.xi.size - 1])
    direct = spectral.fourier_transform_Tx(frames, full.xi[picks], L=3.0, taper=1.0, check=False)
    assert np.allclose(full.values[picks], direct.values, atol=1e-10)


def test_streamed_transform_matches_stored_field(pair_field_module: AnsatzField, frames: FrameField) -> None:
    xi = [0.7, -2.5, 3.1]
    streamed, thin = spectral.stream_transform(pair_field_module, 0.05, xi, L=3.0, taper=1.0, dx=1e-3, check=False)
    direct = spectral.fourier_transform_Tx(frames, xi, L=3.0, taper=1.0, check=False)
    assert np.allclose(streamed.values, direct.values, atol=1e-9)
    assert thin.x.size == frames.x.size
    assert np.allclose(thin.x, frames.x, atol=1e-9)
    assert np.allclose(thin.frames, frames.frames, atol=1e-9)


def test_predictor_at_center_equals_frozen_sum(pair_field: AnsatzField, right_angle_pair: PolyLine) -> None:
    t, n = 0.01, 10
    xi = 1.0 / (2.0 * math.pi * t)
    predicted = spectral.resonant_predictor(t, xi, n, pair_field, right_angle_pair, region="local")
    frozen = spectral.frozen_boundary_sum(t, xi, n, pair_field, right_angle_pair, region="local")
    assert np.linalg.norm(frozen) > 0
    assert np.allclose(predicted, frozen, atol=1e-8 * np.linalg.norm(frozen))


def test_predictor_needs_fine_field(pair_field: AnsatzField, right_angle_pair: PolyLine) -> None:
    coarse = hasimoto.polyline_field(right_angle_pair, np.linspace(-3.0, 3.0, 13))
    with pytest.raises(RefinementError):
        spectral.resonant_predictor(0.01, 15.9, 10, pair_field, coarse)


def test_xi_intervals_exclude_windows() -> None:
    spectrum = flat_spectrum(0.05, np.arange(401) / 100.0)
    intervals, excluded = spectral.xi_intervals(spectrum, [1, 2, 3], n=10)
    assert [i.k for i in intervals] == [1, 2]
    assert excluded == [3]
    assert all(i.value == pytest.approx(1.0) for i in intervals)
    assert spectral.energy_density_Xi(spectrum, [1, 2], n=10) == pytest.approx(1.0)
    with pytest.raises(DomainValidationError):
        spectral.energy_density_Xi(spectrum, [3], n=10)


def test_offwindow_check_scaling() -> None:
    t, n = 0.05, 16
    spectrum = flat_spectrum(t, np.array(spectral.offwindow_frequencies(t)))
    assert spectral.offwindow_check(t, spectrum, n) == pytest.approx(math.sqrt(t * n * n))


def calibration(**overrides: float) -> Calibration:
    entry = {
        "theta": RIGHT_ANGLE,
        "corners": 2,
        "t_theta": 0.02,
        "t_tilde_theta": 0.01,
        "n_theta": 8,
        "c_lower": 0.014,
        "c_upper": 0.17,
    }
    entry.update(overrides)
    return Calibration(entries=[CalibrationEntry(**entry)])


def test_calibration_interpolation() -> None:
    table = Calibration(
        entries=[
            CalibrationEntry(theta=1.0, t_theta=0.02, t_tilde_theta=0.01, n_theta=8, c_lower=0.01, c_upper=0.1),
            CalibrationEntry(theta=2.0, t_theta=0.04, t_tilde_theta=0.01, n_theta=16, c_lower=0.03, c_upper=0.3),
        ]
    )
    mid = spectral.calibration_entry(1.5, 2, table)
    assert mid.t_theta == pytest.approx(0.03)
    assert mid.c_lower == pytest.approx(0.02)
    assert mid.n_theta == 16
    assert spectral.calibration_entry(3.0, 2, table).theta == 2.0
    assert spectral.calibration_entry(1.0, 4, table).theta == 1.0


def test_missing_calibration() -> None:
    with pytest.raises(DomainValidationError):
        spectral.calibration_entry(1.0, 2, Calibration())


def test_admissible_time_inside_interval() -> None:
    table = calibration()
    n = 16
    lo, hi = spectral.admissible_interval(RIGHT_ANGLE, n, 2, table)
    t = spectral.admissible_time(RIGHT_ANGLE, n, calibration=table)
    assert lo < t * n * n < hi
    assert t * n * n == pytest.approx(math.sqrt(lo * hi))


def test_admissible_time_snaps_to_8pi() -> None:
    table = calibration()
    for n in (16, 32):
        t = spectral.admissible_time(RIGHT_ANGLE, n, snap_8pi=True, calibration=table)
        k = 1.0 / (8.0 * math.pi * t)
        assert k == pytest.approx(round(k), abs=1e-6)


def test_small_n_names_required_n() -> None:
    with pytest.raises(AdmissibilityError) as info:
        spectral.admissible_time(RIGHT_ANGLE, 4, calibration=calibration())
    assert info.value.required_n == 8
    assert info.value.exit_code == 2


def test_empty_interval_names_required_n() -> None:
    table = calibration(t_tilde_theta=1e-4, n_theta=2, c_lower=0.02)
    with pytest.raises(AdmissibilityError) as info:
        spectral.admissible_time(RIGHT_ANGLE, 4, calibration=table)
    assert info.value.required_n == 12
    assert spectral.admissible_time(RIGHT_ANGLE, 12, calibration=table) > 0


def test_snap_to_8pi() -> None:
    assert spectral.snap_to_8pi(0.01, 0.009, 0.011) == pytest.approx(1.0 / (32.0 * math.pi))
    with pytest.raises(AdmissibilityError):
        spectral.snap_to_8pi(0.0101, 0.0101, 0.0102)


def test_growth_target_choice(single_corner: PolyLine, right_angle_pair: PolyLine, four_corners: PolyLine) -> None:
    assert spectral.growth_target(single_corner).degenerate
    assert spectral.growth_target(right_angle_pair).modulus > 0
    assert spectral.growth_target(four_corners, 2).m == 2


def test_scan_failure_is_recorded(right_angle_pair: PolyLine) -> None:
    point, entries, spectrum = spectral.scan_single_n(right_angle_pair, 4)
    assert point.error is not None
    assert point.error["details"]["required_n"] == 8
    assert entries == []
    assert spectrum is None


def test_every_window_carries_lemma_error(right_angle_pair: PolyLine) -> None:
    point, entries, _ = spectral.scan_single_n(right_angle_pair, 16, t=0.002)
    assert point.error is None
    assert len(entries) == 6
    errors = [e.lemma_error for e in entries]
    assert all(e is not None and math.isfinite(e) for e in errors)
    assert point.lemma_error == max(errors)
    plus = next(e for e in entries if e.sign > 0 and e.delta == 0.0)
    minus = next(e for e in entries if e.sign < 0 and e.delta == 0.0)
    assert minus.lemma_error == pytest.approx(plus.lemma_error, rel=1e-9)
    assert point.offwindow_sup == pytest.approx(point.offwindow / math.sqrt(point.tau))


def test_single_corner_scan_has_no_lemma_error(single_corner: PolyLine) -> None:
    point, entries, _ = spectral.scan_single_n(single_corner, 16, t=0.002)
    assert point.error is None
    assert point.lemma_error is None
    assert all(e.lemma_error is None and e.passed for e in entries)


def scan_point(n: int, offwindow: float, lemma_error: float, peak: float = 1.0) -> ScanPoint:
    tau = 0.01
    return ScanPoint(
        n=n,
        t=tau / (n * n),
        tau=tau,
        peak=peak,
        log_statistic=0.0,
        offwindow=offwindow,
        offwindow_sup=offwindow / math.sqrt(tau),
        lemma_error=lemma_error,
    )


def test_trend_checks_pass() -> None:
    points = [scan_point(32, 0.011, 0.5), scan_point(16, 0.01, 1.0), scan_point(64, 0.012, 0.2)]
    checks = spectral.trend_checks(points, degenerate=False, tolerances=Tolerances())
    assert checks["offwindow_ratios"] == pytest.approx([1.1, 0.012 / 0.011])
    assert checks["offwindow_flat"] is True
    assert checks["lemma_shrink"] == pytest.approx([2.0, 2.5])
    assert checks["lemma_trend_ok"] is True
    assert checks["offwindow_below_peak"] is True


def test_trend_checks_fail() -> None:
    points = [scan_point(16, 0.01, 1.0), scan_point(32, 0.03, 0.9, peak=0.2)]
    checks = spectral.trend_checks(points, degenerate=False, tolerances=Tolerances())
    assert checks["offwindow_flat"] is False
    assert checks["lemma_trend_ok"] is False
    assert checks["offwindow_below_peak"] is False


def test_trend_checks_skip_failed_and_degenerate() -> None:
    failed = ScanPoint(n=32, t=0.0, tau=0.0, peak=0.0, log_statistic=0.0, error={"exit_code": 2})
    checks = spectral.trend_checks([scan_point(16, 0.01, 1.0), failed], degenerate=True, tolerances=Tolerances())
    assert checks["offwindow_ratios"] == []
    assert checks["offwindow_flat"] is None
    assert checks["lemma_trend_ok"] is None
    assert checks["offwindow_below_peak"] is None


def test_single_corner_windows_stay_bounded(single_corner: PolyLine) -> None:
    # две стационарные точки x = +-4 pi t xi, каждая даёт не больше alpha sqrt(2 pi)
    alpha = math.sqrt(single_corner.corners.mass)
    bound = 2.0 * alpha * math.sqrt(2.0 * math.pi) * 1.1
    tau = 0.5
    for n in (16, 32):
        point, entries, _ = spectral.scan_single_n(single_corner, n, t=tau / (n * n))
        assert point.error is None
        assert max(math.hypot(*e.measured) for e in entries) < bound
