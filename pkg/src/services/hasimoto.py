"""
Восстановление рамки (T, N) и кривой chi по решению u методом Хасимото.

По x при фиксированном t:   T_x = Re(conj(u) N),  N_x = -u T.
По t при фиксированном x:   T_t = Im(conj(u_x) N),
                            N_t = -i u_x T + (i/2)(|u|^2 - M/t) N,
                            chi_t = Im(conj(u) N).
Обе системы линейны по рамке, поэтому пропагаторы шагов RK4 строятся пакетно,
каждый ортонормируется (Грам - Шмидт), а рамки получаются префиксным произведением.
"""
import math
from collections.abc import Iterator

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid
from scipy.spatial.transform import Rotation

from src.core import settings
from src.core.constant import FAIL_GRID_X0, FAIL_STEP_UNDERFLOW, FAIL_TIME_POSITIVE, FAIL_UNDERSAMPLED
from src.core.errors import ConvergenceError, DomainValidationError, RefinementError
from src.schemas.ansatz import AnsatzField
from src.schemas.frame import AlignmentReport, Curve, Frame, FrameField, MarchStats, SpaceGrid
from src.schemas.geometry import PolyLine
from src.services import ansatz
from src.services.geometry import polyline_tangent
from src.utils.linalg import (
    gram_schmidt,
    orthonormality_defect,
    prefix_products,
    rk4_propagators,
    skew_from_components,
)

MAX_TIME_STEPS = 50_000_000


# ————————————————————————————————————————————————————————————
# Марш по пространству
# ————————————————————————————————————————————————————————————

def local_wavenumber(field: AnsatzField, t: float, x_min: float, x_max: float) -> float:
    """Наибольшая скорость вращения фазы слагаемых u на отрезке: max |x - j| / 2t."""
    active = field.positions[np.abs(field.alphas) > 0]
    if active.size == 0:
        return 0.0
    reach = np.maximum(np.abs(x_min - active), np.abs(x_max - active))
    return float(reach.max() / (2.0 * t))


def resolved_grid(field: AnsatzField, t: float, half_width: float) -> SpaceGrid:
    """Сетка [-half_width, half_width] с узлом в 0 и шагом не крупнее space_step и половины порога."""
    k_max = local_wavenumber(field, t, -half_width, half_width)
    dx = settings.space_step
    if k_max > 0:
        dx = min(dx, 0.5 * settings.oscillation_threshold / k_max)
    dx = half_width / math.ceil(half_width / dx)
    return SpaceGrid(x_min=-half_width, x_max=half_width, dx=dx)


def _space_generators(u: np.ndarray) -> np.ndarray:
    return skew_from_components(u.real, u.imag, np.zeros(u.shape))


def iter_space_march(
    field: AnsatzField,
    t: float,
    frame0: np.ndarray,
    x0: float,
    x_end: float,
    step: float,
    chunk_size: int | None = None,
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    """
    Потоковый марш из x0 к x_end с шагом |step|.

    Отдаёт блоки (x, frames, u, drift) без стартового узла; frames - (k, 3, 3).
    """
    chunk_size = chunk_size or settings.chunk_size
    total = int(round(abs(x_end - x0) / step))
    h = step if x_end >= x0 else -step
    current = np.array(frame0, dtype=float)
    done = 0
    while done < total:
        count = min(chunk_size, total - done)
        half = x0 + h * (done + 0.5 * np.arange(2 * count + 1))
        u_half = np.asarray(ansatz.eval_u(field, t, half))
        omega = _space_generators(u_half)
        props = rk4_propagators(omega[0:-1:2], omega[1::2], omega[2::2], h)
        drift = float(orthonormality_defect(props).max())
        props = gram_schmidt(props)
        frames = current @ prefix_products(props)[1:]
        current = gram_schmidt(frames[-1])
        done += count
        yield half[2::2], frames, u_half[2::2], drift


def tangent_derivative(frames: np.ndarray, u: np.ndarray) -> np.ndarray:
    """T_x = Re(conj(u) N) = Re(u) e1 + Im(u) e2."""
    return u.real[:, None] * frames[:, :, 1] + u.imag[:, None] * frames[:, :, 2]


def integrate_frame_in_space(
    field: AnsatzField,
    t: float,
    frame_at_x0: Frame,
    grid: SpaceGrid,
    x0: float = 0.0,
) -> FrameField:
    """Марш RK4 влево и вправо от x0 с перепроекцией каждого шага."""
    if not t > 0:
        raise DomainValidationError(FAIL_TIME_POSITIVE, t=t)
    nodes = grid.nodes()
    i0 = int(np.argmin(np.abs(nodes - x0)))
    if abs(nodes[i0] - x0) > 1e-9 * max(1.0, abs(x0)):
        raise DomainValidationError(FAIL_GRID_X0, x0=x0)
    k_max = local_wavenumber(field, t, grid.x_min, grid.x_max)
    if k_max * grid.dx > settings.oscillation_threshold:
        suggested = settings.oscillation_threshold / k_max
        raise RefinementError(FAIL_UNDERSAMPLED, suggested_step=suggested, dx=grid.dx)

    start = frame_at_x0.matrix()
    frames = np.empty((nodes.size, 3, 3))
    u_nodes = np.empty(nodes.size, dtype=complex)
    frames[i0] = start
    u_nodes[i0] = ansatz.eval_u(field, t, nodes[i0])
    drift = 0.0
    for direction_end, sign in ((nodes[-1], 1), (nodes[0], -1)):
        idx = i0
        for _, block, u_block, block_drift in iter_space_march(
            field, t, start, nodes[i0], direction_end, grid.dx
        ):
            count = block.shape[0]
            sl = slice(idx + 1, idx + 1 + count) if sign > 0 else slice(idx - count, idx)
            frames[sl] = block if sign > 0 else block[::-1]
            u_nodes[sl] = u_block if sign > 0 else u_block[::-1]
            idx = idx + count if sign > 0 else idx - count
            drift = max(drift, block_drift)

    logger.debug(f"space march t={t}: {nodes.size} nodes, drift={drift:.2e}")
    return FrameField(
        t=t,
        x=nodes,
        frames=frames,
        tx=tangent_derivative(frames, u_nodes),
        max_drift=drift,
    )


# ————————————————————————————————————————————————————————————
# Марш по времени
# ————————————————————————————————————————————————————————————

def _time_generators(field: AnsatzField, s: np.ndarray, x0: float) -> np.ndarray:
    """Генератор в переменной s = 1/t: dF/ds = F * (-t^2 Omega_t)."""
    t = 1.0 / s
    u, ux = ansatz.eval_along_time(field, t, x0)
    w = np.abs(u) ** 2 - field.mass / t
    omega = skew_from_components(-ux.imag, ux.real, -0.5 * w)
    return -(t * t)[:, None, None] * omega


def _time_step(field: AnsatzField, x0: float, t_hi: float, phase_step: float) -> float:
    """Шаг по s: фаза (x0 - j)^2 s / 4 и скорости вращения рамки за шаг не больше phase_step."""
    shift = np.abs(x0 - field.positions) if field.positions.size else np.zeros(1)
    l1 = field.corners.l1_norm
    rate = float(
        np.max(shift * shift) / 4.0
        + l1 * np.max(shift) * np.sqrt(t_hi) / 2.0
        + l1 * l1 * t_hi
        + field.mass
    )
    return phase_step / max(rate, 1e-12)


def _march_time(
    field: AnsatzField,
    x0: float,
    frame0: np.ndarray,
    t0: float,
    t_target: float,
    phase_step: float | None = None,
) -> tuple[np.ndarray, MarchStats]:
    if not (t0 > 0 and t_target > 0):
        raise DomainValidationError(FAIL_TIME_POSITIVE, t0=t0, t_target=t_target)
    phase_step = phase_step or settings.time_phase_step
    s0, s1 = 1.0 / t0, 1.0 / t_target
    ds_max = _time_step(field, x0, max(t0, t_target), phase_step)
    span = s1 - s0
    steps = max(16, int(np.ceil(abs(span) / ds_max))) if span else 0
    if steps > MAX_TIME_STEPS:
        reached = 1.0 / (s0 + np.sign(span) * MAX_TIME_STEPS * ds_max)
        raise ConvergenceError(FAIL_STEP_UNDERFLOW, reached_t=float(reached), steps=steps)

    current = np.array(frame0, dtype=float)
    shift = np.zeros(3)
    drift = 0.0
    if steps == 0:
        return current, MarchStats(steps=0, max_drift=0.0, reached_t=t_target)
    ds = span / steps
    chunk = settings.chunk_size
    done = 0
    while done < steps:
        count = min(chunk, steps - done)
        half = s0 + ds * (done + 0.5 * np.arange(2 * count + 1))
        omega = _time_generators(field, half, x0)
        props = rk4_propagators(omega[0:-1:2], omega[1::2], omega[2::2], ds)
        drift = max(drift, float(orthonormality_defect(props).max()))
        props = gram_schmidt(props)
        frames = np.concatenate([current[None], current @ prefix_products(props)[1:]])

        # chi_s = -t^2 Im(conj(u) N) = -t^2 (Re(u) e2 - Im(u) e1)
        s_nodes = half[0::2]
        t_nodes = 1.0 / s_nodes
        u, _ = ansatz.eval_along_time(field, t_nodes, x0)
        velocity = u.real[:, None] * frames[:, :, 2] - u.imag[:, None] * frames[:, :, 1]
        velocity *= -(t_nodes * t_nodes)[:, None]
        shift += np.trapezoid(velocity, s_nodes, axis=0)

        current = gram_schmidt(frames[-1])
        done += count

    logger.debug(f"time march x0={x0}: {t0} -> {t_target}, {steps} steps, drift={drift:.2e}")
    stats = MarchStats(
        steps=steps,
        max_drift=drift,
        reached_t=t_target,
        anchor_shift=tuple(float(c) for c in shift),
    )
    return current, stats


def integrate_frame_in_time(
    field: AnsatzField,
    x0: float,
    frame0: Frame,
    t0: float,
    t_target: float,
    phase_step: float | None = None,
) -> Frame:
    """
    Рамка в (t_target, x0) по рамке в (t0, x0).

    Шаг равномерен по s = 1/t: в t это h = t^2 ds, так что h/t не больше ds max(t0, t_target)
    и сгущается к t = 0 быстрее геометрического. Допускается и обратный ход t_target > t0.
    """
    matrix, stats = _march_time(field, x0, frame0.matrix(), t0, t_target, phase_step)
    return Frame.from_matrix(matrix)


def march_time_with_stats(
    field: AnsatzField,
    x0: float,
    frame0: Frame,
    t0: float,
    t_target: float,
    phase_step: float | None = None,
) -> tuple[Frame, MarchStats]:
    matrix, stats = _march_time(field, x0, frame0.matrix(), t0, t_target, phase_step)
    return Frame.from_matrix(matrix), stats


def compatibility_defect(
    field: AnsatzField,
    frame0: Frame,
    t0: float,
    t1: float,
    x0: float,
    x1: float,
    dx: float | None = None,
) -> float:
    """
    Расхождение путей (t0,x0)->(t1,x0)->(t1,x1) и (t0,x0)->(t0,x1)->(t1,x1).

    Для одного угла (точное решение) определяется только погрешностью схем.
    """
    dx = dx or settings.space_step
    lo, hi = min(x0, x1), max(x0, x1)

    def _space(t: float, frame: Frame) -> Frame:
        grid = SpaceGrid(x_min=lo, x_max=hi, dx=dx)
        fld = integrate_frame_in_space(field, t, frame, grid, x0=x0)
        return fld.frame_at(fld.index_of(x1))

    path_a = _space(t1, integrate_frame_in_time(field, x0, frame0, t0, t1))
    path_b = integrate_frame_in_time(field, x1, _space(t0, frame0), t0, t1)
    defect = float(np.max(np.abs(path_a.matrix() - path_b.matrix())))
    logger.info(f"compatibility defect ({t0}->{t1}, {x0}->{x1}): {defect:.3e}")
    return defect


# ————————————————————————————————————————————————————————————
# Кривая
# ————————————————————————————————————————————————————————————

def reconstruct_curve(field: FrameField, anchor: tuple[float, np.ndarray]) -> Curve:
    """chi(t, x) = P + int_{x0}^{x} T dx (кумулятивная трапеция)."""
    x0, point = anchor
    integral = cumulative_trapezoid(field.T, field.x, axis=0, initial=0.0)
    at_x0 = np.array([np.interp(x0, field.x, integral[:, k]) for k in range(3)])
    points = np.asarray(point, dtype=float) + integral - at_x0
    return Curve(t=field.t, x=field.x, points=points)


def evolve_anchor(
    field: AnsatzField,
    x0: float,
    frame0: Frame,
    point0: np.ndarray,
    t0: float,
    t1: float,
) -> tuple[np.ndarray, Frame]:
    """Перенос якоря chi(t, x0) по chi_t = Im(conj(u) N) вместе с рамкой."""
    matrix, stats = _march_time(field, x0, frame0.matrix(), t0, t1)
    return np.asarray(point0, dtype=float) + np.array(stats.anchor_shift), Frame.from_matrix(matrix)


def frame_energy(field: FrameField) -> float:
    """int |T_x|^2 dx, совпадает с int |u|^2 dx."""
    return float(np.trapezoid(np.sum(field.tx * field.tx, axis=1), field.x))


# ————————————————————————————————————————————————————————————
# Сравнение с ломаной
# ————————————————————————————————————————————————————————————

def _segment_windows(poly: PolyLine, x_min: float, x_max: float, margin: float) -> list[tuple[float, float]]:
    positions = poly.corners.positions
    edges = np.concatenate([[x_min + margin], positions, [x_max - margin]])
    last = edges.size - 2
    windows = []
    for k in range(last + 1):
        lo, hi = float(edges[k]), float(edges[k + 1])
        pad = 0.25 * min(1.0, hi - lo)
        windows.append((lo + (pad if k > 0 else 0.0), hi - (pad if k < last else 0.0)))
    return windows


def measured_directions(field: FrameField, poly: PolyLine, margin: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Средние направления T на отрезках ломаной (и маска покрытых отрезков)."""
    windows = _segment_windows(poly, float(field.x[0]), float(field.x[-1]), margin)
    out = np.zeros((len(windows), 3))
    mask = np.zeros(len(windows), dtype=bool)
    for k, (lo, hi) in enumerate(windows):
        sel = (field.x >= lo) & (field.x <= hi)
        if hi > lo and np.count_nonzero(sel) >= 2:
            mean = field.T[sel].mean(axis=0)
            out[k] = mean / np.linalg.norm(mean)
            mask[k] = True
    return out, mask


def align_to_polyline(field: FrameField, poly: PolyLine, margin: float = 0.0) -> tuple[FrameField, AlignmentReport]:
    """
    Поворот поля, совмещающий средние направления отрезков с ломаной (Кабш).

    Угол поворота и остаточное рассогласование пишутся в отчёт.
    """
    measured, mask = measured_directions(field, poly, margin)
    targets = poly.directions_array()[mask]
    measured = measured[mask]
    if measured.shape[0] == 0:
        rotation = Rotation.identity()
    else:
        rotation, _ = Rotation.align_vectors(targets, measured)
    matrix = rotation.as_matrix()
    rmsd = float(np.sqrt(np.mean(np.sum((measured @ matrix.T - targets) ** 2, axis=1)))) if measured.size else 0.0
    report = AlignmentReport(
        rotation=matrix.tolist(),
        angle=float(rotation.magnitude()),
        rmsd=rmsd,
        segments=int(mask.sum()),
    )
    logger.debug(f"alignment angle={report.angle:.4f} rad, rmsd={rmsd:.2e}, segments={report.segments}")
    return field.rotated(matrix), report


def polyline_field(poly: PolyLine, x: np.ndarray) -> FrameField:
    """Поле t = 0: касательные ломаной, нормали дополняют до правой тройки."""
    tangents = polyline_tangent(poly, x)
    helper = np.tile([0.0, 0.0, 1.0], (x.size, 1))
    helper[np.abs(tangents[:, 2]) > 0.9] = [0.0, 1.0, 0.0]
    e1 = np.cross(helper, tangents)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(tangents, e1)
    frames = np.stack([tangents, e1, e2], axis=-1)
    return FrameField(t=0.0, x=np.asarray(x, dtype=float), frames=frames, tx=np.zeros((x.size, 3)))


def polyline_limit_error(t: float, poly: PolyLine, field: FrameField, margin: float = 0.05) -> float:
    """
    sup |T(t,x) - T(0,x)| по узлам вне margin-окрестностей полуцелых точек.

    Поле предварительно выравнивается по ломаной.
    """
    if t > 0:
        field, _ = align_to_polyline(field, poly)
    distance_half = np.abs(field.x * 2.0 - np.round(field.x * 2.0)) / 2.0
    keep = distance_half >= margin
    excluded = int(np.count_nonzero(~keep))
    if not keep.any():
        return 0.0
    diff = np.linalg.norm(field.T[keep] - polyline_tangent(poly, field.x[keep]), axis=1)
    error = float(diff.max())
    logger.debug(f"polyline limit error t={t}: {error:.3e} ({excluded} nodes excluded)")
    return error
