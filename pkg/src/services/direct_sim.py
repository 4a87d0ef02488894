"""
Прямое конечно-разностное интегрирование отображения Шрёдингера T_t = T x T_xx.

Не использует ни анзац, ни восстановление рамок: служит независимой проверкой.
Краевые узлы закреплены на дальних направлениях ломаной.
"""
import math
from collections.abc import Sequence

import numpy as np
from loguru import logger
from scipy.spatial.transform import Rotation

from src.core import settings
from src.core.constant import (
    FAIL_BLOWUP,
    FAIL_DT_UNSTABLE,
    FAIL_EPS_LARGE,
    FAIL_EPS_SMALL,
    FAIL_GRID_OVERLAP,
    FAIL_TIMES_MISMATCH,
)
from src.core.errors import ConvergenceError, DomainValidationError
from src.schemas.frame import Frame, FrameField, SpaceGrid
from src.schemas.geometry import PolyLine
from src.schemas.simulation import CompareMetrics, SimulationRun, TangentField
from src.services import ansatz, hasimoto
from src.services.geometry import polyline_tangent
from src.utils.linalg import angle_between, slerp
from src.utils.parallel import run_jobs

DEFAULT_BOUNDARY_LAYER = 1.0


def init_from_polyline(poly: PolyLine, grid: SpaceGrid, mollify_eps: float) -> TangentField:
    """
    Касательные ломаной, сглаженные в окрестности ширины mollify_eps каждого угла.

    Внутри окрестности направление идёт по геодезической между соседними
    отрезками с весом smoothstep.
    """
    h = grid.dx
    if mollify_eps < 2.0 * h * (1.0 - 1e-12):
        raise DomainValidationError(FAIL_EPS_SMALL, eps=mollify_eps, h=h)
    positions = poly.corners.positions
    if positions.size > 1 and mollify_eps > float(np.min(np.diff(positions))):
        raise DomainValidationError(FAIL_EPS_LARGE, eps=mollify_eps)

    x = grid.nodes()
    T = polyline_tangent(poly, x).copy()
    directions = poly.directions_array()
    for k, pos in enumerate(positions):
        sel = np.abs(x - pos) < 0.5 * mollify_eps
        s = (x[sel] - pos) / mollify_eps + 0.5
        weight = s * s * (3.0 - 2.0 * s)
        T[sel] = slerp(directions[k], directions[k + 1], weight)
    return TangentField(t=0.0, x=x, T=T)


def _rhs(T: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(T)
    lap = (T[2:] - 2.0 * T[1:-1] + T[:-2]) / (h * h)
    out[1:-1] = np.cross(T[1:-1], lap)
    return out


def step(field: TangentField, dt: float) -> TangentField:
    """Один шаг RK4 с перенормировкой узлов на сферу."""
    h = field.h
    limit = settings.stability_factor * h * h
    if dt > limit * (1.0 + 1e-12):
        raise DomainValidationError(FAIL_DT_UNSTABLE, dt=dt, limit=limit)
    T = field.T
    k1 = _rhs(T, h)
    k2 = _rhs(T + 0.5 * dt * k1, h)
    k3 = _rhs(T + 0.5 * dt * k2, h)
    k4 = _rhs(T + dt * k3, h)
    new = T + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    norms = np.linalg.norm(new, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > settings.blowup_guard:
        raise ConvergenceError(FAIL_BLOWUP, t=field.t, drift=drift)
    return TangentField(t=field.t + dt, x=field.x, T=new / norms[:, None], drift=drift)


def energy(field: TangentField) -> float:
    """Дискретная энергия sum |T_{i+1} - T_i|^2 / h, аналог int |T_x|^2 dx."""
    diff = np.diff(field.T, axis=0)
    return float(np.sum(diff * diff) / field.h)


def total_turning(field: TangentField) -> float:
    """Сумма геодезических углов между соседними узлами."""
    return float(np.sum(angle_between(field.T[:-1], field.T[1:])))


def run(
    field: TangentField,
    t_final: float,
    dt: float | None = None,
    snapshot_times: Sequence[float] = (),
    energy_every: int = 10,
) -> SimulationRun:
    """
    Шаги до t_final; шаг выравнивается так, чтобы t_final попадал в сетку.

    Снимок берётся на первом шаге, где t >= запрошенного момента.
    """
    span = t_final - field.t
    if span < 0:
        raise DomainValidationError(FAIL_TIMES_MISMATCH, t0=field.t, t_final=t_final)
    dt_max = dt or settings.stability_factor * field.h * field.h
    steps = max(1, math.ceil(span / dt_max)) if span > 0 else 0
    dt = span / steps if steps else dt_max

    pending = sorted(snapshot_times)
    snapshots = []
    e0 = energy(field)
    times, values = [field.t], [e0]
    max_drift = 0.0
    while pending and pending[0] <= field.t:
        snapshots.append(field)
        pending.pop(0)
    for k in range(1, steps + 1):
        field = step(field, dt)
        max_drift = max(max_drift, field.drift)
        if k % energy_every == 0 or k == steps:
            times.append(field.t)
            values.append(energy(field))
        while pending and pending[0] <= field.t + 0.5 * dt:
            snapshots.append(field)
            pending.pop(0)

    scale = e0 if e0 > 0 else 1.0
    energy_drift = float(np.max(np.abs(np.array(values) - e0)) / scale)
    logger.info(
        f"direct sim: {steps} steps, dt={dt:.3e}, energy drift={energy_drift:.2e}, "
        f"norm drift={max_drift:.2e}"
    )
    return SimulationRun(
        final=field,
        snapshots=snapshots,
        dt=dt,
        steps=steps,
        energy_times=times,
        energy_values=values,
        energy_drift=energy_drift,
        max_drift=max_drift,
    )


def compare_to_hasimoto(
    field: TangentField,
    frame_field: FrameField,
    boundary_layer: float = DEFAULT_BOUNDARY_LAYER,
) -> CompareMetrics:
    """
    sup и L2 расстояния T на общей области без краевых слоёв.

    Поле Хасимото определено с точностью до поворота, поэтому оно сначала
    совмещается с прямым решением (Кабш по узлам общей области).
    """
    t = field.t
    if abs(t - frame_field.t) > 1e-12 * max(1.0, abs(t)):
        raise DomainValidationError(FAIL_TIMES_MISMATCH, direct=t, hasimoto=frame_field.t)
    lo = max(float(field.x[0]), float(frame_field.x[0])) + boundary_layer
    hi = min(float(field.x[-1]), float(frame_field.x[-1])) - boundary_layer
    sel = (frame_field.x >= lo) & (frame_field.x <= hi)
    if not hi > lo or np.count_nonzero(sel) < 2:
        raise DomainValidationError(FAIL_GRID_OVERLAP, x_min=lo, x_max=hi)

    x = frame_field.x[sel]
    direct = np.stack([np.interp(x, field.x, field.T[:, k]) for k in range(3)], axis=-1)
    direct /= np.linalg.norm(direct, axis=1, keepdims=True)
    rotation, _ = Rotation.align_vectors(direct, frame_field.T[sel])
    diff = np.linalg.norm(direct - rotation.apply(frame_field.T[sel]), axis=1)
    metrics = CompareMetrics(
        t=t,
        sup=float(diff.max()),
        l2=float(math.sqrt(np.trapezoid(diff * diff, x))),
        x_min=lo,
        x_max=hi,
        nodes=int(x.size),
        rotation_angle=float(rotation.magnitude()),
    )
    logger.debug(f"direct vs hasimoto t={t}: sup={metrics.sup:.3e}, l2={metrics.l2:.3e}")
    return metrics


def _sweep_point(
    poly: PolyLine,
    t: float,
    eps: float,
    L: float,
    h: float,
) -> CompareMetrics:
    direct = run(init_from_polyline(poly, SpaceGrid(x_min=-L, x_max=L, dx=h), eps), t).final
    field = ansatz.make_field(poly.corners)
    inner = L - DEFAULT_BOUNDARY_LAYER
    frames = hasimoto.integrate_frame_in_space(
        field, t, Frame.canonical(), hasimoto.resolved_grid(field, t, inner)
    )
    metrics = compare_to_hasimoto(direct, frames)
    return metrics.model_copy(update={"mollify_eps": eps})


def mollification_sweep(
    poly: PolyLine,
    t: float,
    eps_values: Sequence[float],
    L: float = 4.0,
    h: float | None = None,
    workers: int | None = None,
) -> list[CompareMetrics]:
    """
    Расстояния прямого решения до поля Хасимото при уменьшении ширины сглаживания.

    Шаг сетки по умолчанию - половина наименьшего eps.
    """
    if not eps_values:
        return []
    h = h or 0.5 * min(eps_values)
    jobs = [(poly, t, float(eps), L, h) for eps in eps_values]
    results = run_jobs(_sweep_point, jobs, workers or settings.workers)
    for r in results:
        logger.info(f"eps={r.mollify_eps}: sup={r.sup:.3e}, l2={r.l2:.3e}")
    return results
