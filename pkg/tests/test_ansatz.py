import math

import numpy as np
import pytest

from src.core.errors import DomainValidationError
from src.schemas.ansatz import AnsatzField
from src.schemas.geometry import Corner, CornerData
from src.services import ansatz

X = np.linspace(-3.0, 3.0, 41)


@pytest.fixture
def complex_field() -> AnsatzField:
    corners = CornerData(
        entries=[
            Corner(pos=-2, alpha_re=0.4, alpha_im=0.1),
            Corner(pos=1, alpha_re=0.7),
            Corner(pos=3, alpha_re=-0.2, alpha_im=0.5),
        ]
    )
    return ansatz.make_field(corners)


@pytest.mark.parametrize("t", [1e-3, 0.1, 2.0])
def test_mass_is_conserved(complex_field: AnsatzField, t: float) -> None:
    assert ansatz.mass(complex_field, t) == pytest.approx(complex_field.mass, rel=1e-12)


@pytest.mark.parametrize("t", [0.01, 0.3])
def test_pseudo_conformal_identity(complex_field: AnsatzField, t: float) -> None:
    u = ansatz.eval_u(complex_field, t, X)
    w = ansatz.pseudo_conformal(complex_field, t, X)
    assert np.max(np.abs(u - w)) <= 1e-10 * np.max(np.abs(u))


def test_single_corner_solves_nls(corner_field: AnsatzField) -> None:
    for t in (0.01, 0.5):
        residual = ansatz.residual_size(corner_field, t, X)
        scale = np.max(np.abs(ansatz.eval_uxx(corner_field, t, X)))
        assert residual <= 1e-10 * scale


def test_single_corner_closed_form(corner_field: AnsatzField) -> None:
    alpha = corner_field.alphas[0]
    t = 0.05
    expected = alpha * np.exp(1j * X * X / (4 * t)) / math.sqrt(t)
    assert np.allclose(ansatz.eval_u(corner_field, t, X), expected, rtol=1e-12, atol=0.0)


def test_derivative_matches_finite_difference(complex_field: AnsatzField) -> None:
    t, x, h = 0.2, 0.37, 1e-6
    fd = (ansatz.eval_u(complex_field, t, x + h) - ansatz.eval_u(complex_field, t, x - h)) / (2 * h)
    assert abs(fd - ansatz.eval_ux(complex_field, t, x)) < 1e-5 * abs(fd)
    fd_t = (ansatz.eval_u(complex_field, t + h, x) - ansatz.eval_u(complex_field, t - h, x)) / (2 * h)
    assert abs(fd_t - ansatz.eval_ut(complex_field, t, x)) < 1e-5 * abs(fd_t)


def test_amplitude_of_missing_corner(complex_field: AnsatzField) -> None:
    assert ansatz.amplitude(complex_field, 0, 0.1) == 0j
    assert abs(ansatz.amplitude(complex_field, 1, 0.1)) == pytest.approx(0.7)


def test_along_time_matches_pointwise(complex_field: AnsatzField) -> None:
    times = np.array([0.05, 0.1, 0.4])
    u, ux = ansatz.eval_along_time(complex_field, times, 0.25)
    for k, t in enumerate(times):
        assert u[k] == pytest.approx(ansatz.eval_u(complex_field, t, 0.25), rel=1e-12)
        assert ux[k] == pytest.approx(ansatz.eval_ux(complex_field, t, 0.25), rel=1e-12)


@pytest.mark.parametrize("tau", [0.5, 3.0])
def test_companion_mass_over_period(pair_field: AnsatzField, tau: float) -> None:
    period = pair_field.v_period
    assert period == pytest.approx(4 * math.pi)
    assert ansatz.v_mass(pair_field, tau) == pytest.approx(
        period * pair_field.mass, rel=1e-10
    )


def test_even_positions_halve_period() -> None:
    field = ansatz.make_field(CornerData(entries=[Corner(pos=0, alpha_re=1.0), Corner(pos=2, alpha_re=1.0)]))
    assert field.v_period == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_time_must_be_positive(corner_field: AnsatzField, t: float) -> None:
    with pytest.raises(DomainValidationError):
        ansatz.eval_u(corner_field, t, 0.0)


def test_batch_rows_layout(corner_field: AnsatzField) -> None:
    rows = ansatz.batch_rows(corner_field, 0.1, np.array([0.0, 1.0]))
    assert len(rows) == 2
    assert all(len(r) == 5 for r in rows)
    assert rows[0][0] == 0.0


def test_sample_u_matches_eval(complex_field: AnsatzField) -> None:
    sample = ansatz.sample_u(complex_field, 0.3, 0.7)
    assert sample.t == 0.3
    assert sample.value == ansatz.eval_u(complex_field, 0.3, 0.7)
