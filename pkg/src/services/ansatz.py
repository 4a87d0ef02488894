"""
Замкнутые формулы ведущего порядка для u(t, x) и спутника v(tau, y).

u(t, x) = sum_j A_j(t) e^{i(x-j)^2/4t} / sqrt(t),
A_j(t) = e^{-i(|alpha_j|^2 - M) log sqrt(t)} alpha_j.
"""
import numpy as np
from loguru import logger

from src.core.constant import FAIL_TIME_POSITIVE
from src.core.errors import DomainValidationError
from src.schemas.ansatz import AnsatzField, ComplexScalarSample
from src.schemas.geometry import CornerData


def make_field(corners: CornerData) -> AnsatzField:
    return AnsatzField(corners=corners)


def _check_time(t: float | np.ndarray) -> None:
    if np.any(np.asarray(t) <= 0):
        raise DomainValidationError(FAIL_TIME_POSITIVE, t=t)


def amplitudes(field: AnsatzField, t: float) -> np.ndarray:
    """A_j(t) для всех углов (порядок как в corners)."""
    _check_time(t)
    log_sqrt_t = 0.5 * np.log(t)
    return np.exp(-1j * field.beta * log_sqrt_t) * field.alphas


def amplitude(field: AnsatzField, j: int, t: float) -> complex:
    """A_j(t); для позиции без угла alpha_j = 0 и амплитуда нулевая."""
    values = amplitudes(field, t)
    hits = np.nonzero(field.positions == j)[0]
    if hits.size == 0:
        return 0j
    return complex(values[hits[0]])


def _terms(field: AnsatzField, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Слагаемые u_j(t, x) формы (..., corners) и сдвиги x - j."""
    x = np.asarray(x, dtype=float)
    shift = x[..., None] - field.positions
    terms = amplitudes(field, t) * np.exp(1j * shift * shift / (4.0 * t)) / np.sqrt(t)
    return terms, shift


def eval_u(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    terms, _ = _terms(field, t, x)
    out = terms.sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def eval_ux(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    terms, shift = _terms(field, t, x)
    out = (terms * (1j * shift / (2.0 * t))).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def eval_uxx(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    terms, shift = _terms(field, t, x)
    factor = -(shift * shift) / (4.0 * t * t) + 1j / (2.0 * t)
    out = (terms * factor).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def eval_ut(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    terms, shift = _terms(field, t, x)
    psi = shift * shift / (4.0 * t)
    factor = -1j * field.beta / (2.0 * t) - 1j * psi / t - 1.0 / (2.0 * t)
    out = (terms * factor).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def eval_along_time(field: AnsatzField, t: np.ndarray, x0: float) -> tuple[np.ndarray, np.ndarray]:
    """u(t, x0) и u_x(t, x0) для массива времён при фиксированном x0."""
    t = np.asarray(t, dtype=float)
    _check_time(t)
    tt = t[:, None]
    amps = np.exp(-0.5j * np.log(tt) * field.beta) * field.alphas
    shift = x0 - field.positions
    terms = amps * np.exp(1j * shift * shift / (4.0 * tt)) / np.sqrt(tt)
    u = terms.sum(axis=-1)
    ux = (terms * (1j * shift / (2.0 * tt))).sum(axis=-1)
    return u, ux


def eval_v(field: AnsatzField, tau: float, y: np.ndarray | float) -> np.ndarray | complex:
    """
    Периодический спутник v(tau, y) = sum_j conj(A_j(1/tau)) e^{-i tau j^2/4 + i j y/2}.

    Тогда u(t, x) = e^{ix^2/4t} / sqrt(t) * conj(v(1/t, x/t)).
    """
    _check_time(tau)
    y = np.asarray(y, dtype=float)
    coeff = np.conj(amplitudes(field, 1.0 / tau))
    j = field.positions
    phase = -tau * j * j / 4.0 + y[..., None] * j / 2.0
    out = (coeff * np.exp(1j * phase)).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def pseudo_conformal(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    """Правая часть тождества u = T(v), вычисленная через v."""
    _check_time(t)
    x = np.asarray(x, dtype=float)
    out = np.exp(1j * x * x / (4.0 * t)) / np.sqrt(t) * np.conj(eval_v(field, 1.0 / t, x / t))
    return complex(out) if np.ndim(out) == 0 else out


def mass(field: AnsatzField, t: float) -> float:
    """sum_j |A_j(t)|^2."""
    return float(np.sum(np.abs(amplitudes(field, t)) ** 2))


def v_mass(field: AnsatzField, tau: float, samples: int = 4096) -> float:
    """int_period |v|^2 dy по правилу трапеций на периоде (точно для тригонометрических сумм)."""
    period = field.v_period
    y = np.arange(samples) * (period / samples)
    values = eval_v(field, tau, y)
    return float(np.sum(np.abs(values) ** 2) * period / samples)


def nls_residual(field: AnsatzField, t: float, x: np.ndarray | float) -> np.ndarray | complex:
    """i u_t + u_xx + 1/2 (|u|^2 - M/t) u; ноль для одного угла."""
    _check_time(t)
    u = eval_u(field, t, x)
    out = 1j * eval_ut(field, t, x) + eval_uxx(field, t, x)
    out = out + 0.5 * (np.abs(u) ** 2 - field.mass / t) * u
    return out


def residual_size(field: AnsatzField, t: float, x: np.ndarray) -> float:
    """max |residual| на точках x; пишется в лог как диагностика R_j = 0."""
    size = float(np.max(np.abs(nls_residual(field, t, x)))) if np.size(x) else 0.0
    logger.debug(f"nls residual at t={t}: {size:.3e}")
    return size


def sample_u(field: AnsatzField, t: float, x: float) -> ComplexScalarSample:
    return ComplexScalarSample(t=t, x=x, value=complex(eval_u(field, t, x)))


def batch_rows(field: AnsatzField, t: float, x: np.ndarray) -> list[list[float]]:
    """Строки CSV: x, re_u, im_u, re_ux, im_ux."""
    u = np.atleast_1d(eval_u(field, t, x))
    ux = np.atleast_1d(eval_ux(field, t, x))
    return [
        [float(xi), float(a.real), float(a.imag), float(b.real), float(b.imag)]
        for xi, a, b in zip(np.atleast_1d(x), u, ux)
    ]
