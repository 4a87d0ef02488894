"""
Автомодельное решение с одним углом через профильное уравнение.

Профиль G имеет постоянную кривизну alpha и кручение y/2, тройка Френе
(T, n, b) стартует с канонического базиса при y = 0, а G(0) = 2 alpha b(0),
так что 1/2 G - (y/2) T - alpha b = 0 вдоль всей траектории.
"""
import math
from functools import lru_cache

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_simpson, trapezoid
from scipy.interpolate import CubicHermiteSpline

from src.core import settings
from src.core.constant import (
    FAIL_LIMIT_DIVERGENCE,
    FAIL_NEGATIVE_ALPHA,
    FAIL_OUT_OF_RANGE_Y,
    FAIL_PROFILE_RANGE,
    FAIL_PROFILE_REFINEMENT,
    FAIL_TIME_POSITIVE,
)
from src.core.errors import ConvergenceError, DomainValidationError, RefinementError
from src.schemas.profile import AngleLawEntry, AsymptoticTangents, ProfileTrajectory
from src.services.geometry import angle_from_alpha
from src.utils.linalg import (
    angle_between,
    gram_schmidt,
    normalize,
    orthonormality_defect,
    prefix_products,
    rk4_propagators,
    skew_from_components,
)

LIMIT_PERIODS = 8
MIN_ASYMPTOTIC_Y = 50.0


# ————————————————————————————————————————————————————————————
# Интегрирование профиля
# ————————————————————————————————————————————————————————————

def _rotation_rate(alpha: float, y_max: float) -> float:
    return math.hypot(alpha, 0.5 * y_max)


def _resolve_step(alpha: float, y_max: float, dy: float | None) -> float:
    """Шаг с поворотом рамки за шаг не больше profile_phase_step; иначе делим пополам."""
    limit = settings.profile_phase_step / _rotation_rate(alpha, y_max)
    if dy is None:
        return limit
    refinements = 0
    while dy > limit and refinements < settings.profile_max_refinements:
        dy *= 0.5
        refinements += 1
    if dy > limit:
        raise RefinementError(FAIL_PROFILE_REFINEMENT, suggested_step=limit, dy=dy)
    if refinements:
        logger.debug(f"profile step refined {refinements} times to dy={dy:.3e}")
    return dy


def _march_half(
    alpha: float,
    y_end: float,
    dy: float,
    stride: int,
    n_keep: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Марш от y = 0 до y_end; сохраняется каждый stride-й узел."""
    h = math.copysign(dy, y_end)
    total = n_keep * stride
    chunk = max(stride, (settings.chunk_size // stride) * stride)
    current = np.eye(3)
    g = np.array([0.0, 0.0, 2.0 * alpha])
    kept_frames = [current[None]]
    kept_points = [g[None]]
    drift = 0.0
    done = 0
    while done < total:
        count = total - done if total - done < chunk + 2 else chunk
        half = h * (done + 0.5 * np.arange(2 * count + 1))
        omega = skew_from_components(np.full(half.shape, alpha), np.zeros(half.shape), 0.5 * half)
        props = rk4_propagators(omega[0:-1:2], omega[1::2], omega[2::2], h)
        drift = max(drift, float(orthonormality_defect(props).max()))
        frames = current @ prefix_products(gram_schmidt(props))
        points = g + cumulative_simpson(frames[:, :, 0], dx=h, axis=0, initial=0.0)
        kept_frames.append(frames[stride::stride])
        kept_points.append(points[stride::stride])
        current = gram_schmidt(frames[-1])
        g = points[-1]
        done += count
    y = h * stride * np.arange(n_keep + 1)
    return y, np.concatenate(kept_points), np.concatenate(kept_frames), drift


def integrate_profile(alpha: float, y_max: float | None = None, dy: float | None = None) -> ProfileTrajectory:
    """
    Система Френе T' = alpha n, n' = -alpha T + (y/2) b, b' = -(y/2) n и G' = T
    в обе стороны от y = 0.
    """
    if alpha < 0:
        raise DomainValidationError(FAIL_NEGATIVE_ALPHA, alpha=alpha)
    y_max = y_max or settings.profile_ymax
    if not y_max > 0 or (dy is not None and not dy > 0):
        raise DomainValidationError(FAIL_PROFILE_RANGE, y_max=y_max, dy=dy)

    step = _resolve_step(alpha, y_max, dy)
    stride = max(1, int(round(settings.frame_keep_step / step)))
    n_keep = max(2, math.ceil(y_max / (stride * step)))
    step = y_max / (n_keep * stride)

    y_pos, g_pos, f_pos, drift_pos = _march_half(alpha, y_max, step, stride, n_keep)
    y_neg, g_neg, f_neg, drift_neg = _march_half(alpha, -y_max, step, stride, n_keep)

    traj = ProfileTrajectory(
        alpha=alpha,
        y=np.concatenate([y_neg[:0:-1], y_pos]),
        G=np.concatenate([g_neg[:0:-1], g_pos]),
        frames=np.concatenate([f_neg[:0:-1], f_pos]),
        dy=step,
        max_drift=max(drift_pos, drift_neg),
    )
    logger.debug(
        f"profile alpha={alpha}: Ymax={y_max}, dy={step:.3e}, "
        f"{traj.y.size} samples, drift={traj.max_drift:.2e}"
    )
    return traj


@lru_cache(maxsize=16)
def cached_profile(alpha: float, y_max: float | None = None, dy: float | None = None) -> ProfileTrajectory:
    return integrate_profile(alpha, y_max, dy)


# ————————————————————————————————————————————————————————————
# Невязки
# ————————————————————————————————————————————————————————————

def conserved_defect(traj: ProfileTrajectory) -> float:
    """max |1/2 G - (y/2) T - alpha b| по траектории."""
    defect = 0.5 * traj.G - 0.5 * traj.y[:, None] * traj.T - traj.alpha * traj.binormal
    return float(np.max(np.linalg.norm(defect, axis=1)))


def profile_residual(traj: ProfileTrajectory, y_abs_max: float | None = None) -> float:
    """
    max |1/2 G - (y/2) G' - G' x G''| во внутренних узлах с |y| <= y_abs_max.

    Производные G берутся центральными разностями по сохранённой сетке.
    """
    h = float(traj.y[1] - traj.y[0])
    g = traj.G
    g1 = (g[2:] - g[:-2]) / (2.0 * h)
    g2 = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)
    y = traj.y[1:-1]
    residual = 0.5 * g[1:-1] - 0.5 * y[:, None] * g1 - np.cross(g1, g2)
    norms = np.linalg.norm(residual, axis=1)
    if y_abs_max is not None:
        norms = norms[np.abs(y) <= y_abs_max]
    return float(norms.max()) if norms.size else 0.0


# ————————————————————————————————————————————————————————————
# Асимптотика и угол
# ————————————————————————————————————————————————————————————

def _window_mean(y_abs: np.ndarray, T: np.ndarray, y_end: float) -> tuple[np.ndarray, float, float]:
    """Среднее T с весом y по целым периодам фазы y^2/4, заканчивающимся в y_end."""
    phase = y_abs * y_abs / 4.0
    phase_end = y_end * y_end / 4.0
    sel = (y_abs <= y_end) & (phase >= phase_end - 2.0 * math.pi * LIMIT_PERIODS)
    ys = y_abs[sel]
    mean = trapezoid(T[sel] * ys[:, None], ys, axis=0) / trapezoid(ys, ys)
    amplitude = float(np.max(np.linalg.norm(T[sel] - mean, axis=1)))
    return mean, amplitude, float(np.mean(ys))


def _side_limit(traj: ProfileTrajectory, sign: int) -> tuple[np.ndarray, float]:
    sel = traj.y * sign >= 0
    y_abs = np.abs(traj.y[sel])
    T = traj.T[sel]
    order = np.argsort(y_abs)
    y_abs, T = y_abs[order], T[order]

    far, amp_far, y_far = _window_mean(y_abs, T, traj.y_max)
    near, amp_near, y_near = _window_mean(y_abs, T, 0.5 * traj.y_max)
    if amp_far > 1.05 * amp_near + 1e-9:
        raise ConvergenceError(
            FAIL_LIMIT_DIVERGENCE,
            side=sign,
            amplitude_far=amp_far,
            amplitude_near=amp_near,
        )
    # среднее отклоняется от предела как 1/y^2
    limit = (y_far**2 * far - y_near**2 * near) / (y_far**2 - y_near**2)
    return normalize(limit), amp_far


def asymptotic_tangents(traj: ProfileTrajectory) -> AsymptoticTangents:
    """Пределы T(y) при y -> -inf и y -> +inf (усреднение по периодам и экстраполяция)."""
    if traj.y_max < MIN_ASYMPTOTIC_Y:
        logger.warning(f"Ymax={traj.y_max} is short for limit extraction")
    minus, amp_minus = _side_limit(traj, -1)
    plus, amp_plus = _side_limit(traj, 1)
    return AsymptoticTangents(
        minus=tuple(float(c) for c in minus),
        plus=tuple(float(c) for c in plus),
        oscillation=max(amp_minus, amp_plus),
    )


def corner_angle(tangents: AsymptoticTangents) -> float:
    """Внутренний угол между -T^{-inf} и T^{+inf}; прямая даёт pi."""
    minus, plus = tangents.as_arrays()
    return float(angle_between(-minus, plus))


def measured_corner_angle(alpha: float, y_max: float | None = None, dy: float | None = None) -> float:
    traj = cached_profile(alpha, y_max, dy)
    theta = corner_angle(asymptotic_tangents(traj))
    logger.info(f"alpha={alpha}: measured theta={theta:.6f}, law={angle_from_alpha(alpha):.6f}")
    return theta


def angle_law_entry(alpha: float, y_max: float | None = None, dy: float | None = None) -> AngleLawEntry:
    measured = measured_corner_angle(alpha, y_max, dy)
    law = angle_from_alpha(alpha)
    return AngleLawEntry(alpha=alpha, theta_measured=measured, theta_law=law, abs_err=abs(measured - law))


# ————————————————————————————————————————————————————————————
# Состояние chi(t, x)
# ————————————————————————————————————————————————————————————

def selfsimilar_state(
    t: float,
    x: np.ndarray | float,
    alpha: float,
    traj: ProfileTrajectory | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Точка sqrt(t) G(x/sqrt(t)) и касательная T(x/sqrt(t)).

    Интерполяция эрмитова: G' = T и T' = alpha n известны точно.
    """
    if not t > 0:
        raise DomainValidationError(FAIL_TIME_POSITIVE, t=t)
    if traj is None:
        traj = cached_profile(alpha)
    root = math.sqrt(t)
    x_arr = np.asarray(x, dtype=float)
    y = x_arr / root
    if np.any(np.abs(y) > traj.y_max):
        raise DomainValidationError(FAIL_OUT_OF_RANGE_Y, y=float(np.max(np.abs(y))), y_max=traj.y_max)

    points = CubicHermiteSpline(traj.y, traj.G, traj.T, axis=0)(y) * root
    tangents = normalize(CubicHermiteSpline(traj.y, traj.T, traj.alpha * traj.normal, axis=0)(y))
    return points, tangents


def initial_curve(tangents: AsymptoticTangents, x: np.ndarray | float) -> np.ndarray:
    """chi(0, x): две полупрямые x T^{+inf} при x >= 0 и x T^{-inf} при x < 0."""
    minus, plus = tangents.as_arrays()
    x_arr = np.asarray(x, dtype=float)[..., None]
    return np.where(x_arr >= 0, x_arr * plus, x_arr * minus)
