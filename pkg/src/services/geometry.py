import math
from collections.abc import Sequence

import numpy as np
from loguru import logger

from src.core.constant import (
    FAIL_ANGLE_RANGE,
    FAIL_CORNER_LAYOUT,
    FAIL_M_RANGE,
    FAIL_NEGATIVE_ALPHA,
    FAIL_PLANAR_UNEQUAL,
    FAIL_TWO_CORNERS,
)
from src.core.errors import DomainValidationError
from src.schemas.common import UnitVec3
from src.schemas.geometry import Corner, CornerData, GrowthVector, PolyLine
from src.utils.linalg import rotation_about

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


# ————————————————————————————————————————————————————————————
# Закон угла
# ————————————————————————————————————————————————————————————

def alpha_from_angle(theta: float) -> float:
    """alpha = sqrt((-2/pi) log sin(theta/2)) для theta в (0, pi]."""
    if not (0.0 < theta <= math.pi):
        raise DomainValidationError(FAIL_ANGLE_RANGE, theta=theta)
    value = (-2.0 / math.pi) * math.log(math.sin(theta / 2.0))
    return math.sqrt(max(value, 0.0))


def angle_from_alpha(alpha: float) -> float:
    """theta = 2 arcsin(exp(-pi alpha^2 / 2)), результат в (0, pi]."""
    if alpha < 0:
        raise DomainValidationError(FAIL_NEGATIVE_ALPHA, alpha=alpha)
    return 2.0 * math.asin(math.exp(-0.5 * math.pi * alpha * alpha))


def corners_from_angle(theta: float, positions: Sequence[int]) -> CornerData:
    """Углы одинакового раствора theta в заданных позициях (вещественные alpha)."""
    alpha = alpha_from_angle(theta)
    return CornerData(entries=[Corner(pos=int(p), alpha_re=alpha) for p in positions])


def symmetric_positions(n_corners_half: int) -> list[int]:
    """Позиции -2N+1, ..., 2N-1 для 2N углов."""
    return list(range(-2 * n_corners_half + 1, 2 * n_corners_half, 2))


# ————————————————————————————————————————————————————————————
# Ломаная
# ————————————————————————————————————————————————————————————

def corner_twists(corners: CornerData) -> np.ndarray:
    """
    Кручение плоскостей соседних углов вокруг соединяющего их отрезка.

    tau_j - угол поворота плоскости угла j+1 относительно плоскости угла j
    вокруг направления отрезка (j, j+1):
    tau_j = sum_{k != j+1} |alpha_k|^2 log|x_{j+1} - x_k| - sum_{k != j} |alpha_k|^2 log|x_j - x_k|.
    Для двух углов tau = 0, поэтому пара остаётся плоской.
    """
    x = corners.positions
    weights = np.abs(corners.alphas) ** 2
    twists = np.zeros(max(len(x) - 1, 0))
    for j in range(len(twists)):
        right = np.delete(np.arange(len(x)), j + 1)
        left = np.delete(np.arange(len(x)), j)
        twists[j] = float(
            np.sum(weights[right] * np.log(np.abs(x[j + 1] - x[right])))
            - np.sum(weights[left] * np.log(np.abs(x[j] - x[left])))
        )
    return twists


def _walk_directions(turns: np.ndarray, twists: np.ndarray, mid: int) -> np.ndarray:
    count = len(turns)
    directions = np.zeros((count + 1, 3))
    normals = np.zeros((count, 3))
    directions[mid] = X_AXIS

    half = 0.5 * twists[mid - 1] if 0 < mid < count else 0.0
    if mid < count:
        normals[mid] = rotation_about(X_AXIS, half) @ Z_AXIS
    if mid > 0:
        normals[mid - 1] = rotation_about(X_AXIS, -half) @ Z_AXIS

    for i in range(mid, count):
        if i > mid:
            normals[i] = rotation_about(directions[i], twists[i - 1]) @ normals[i - 1]
        directions[i + 1] = rotation_about(normals[i], turns[i]) @ directions[i]
    for i in range(mid - 1, -1, -1):
        if i < mid - 1:
            normals[i] = rotation_about(directions[i + 1], -twists[i]) @ normals[i + 1]
        directions[i] = rotation_about(normals[i], -turns[i]) @ directions[i + 1]
    return directions


def build_polyline(corners: CornerData, planar: bool = True) -> PolyLine:
    """
    Каноническая ломаная - предел chi(t) при t -> 0 для анзаца с данными углами.

    Средний отрезок направлен по +x, каждый угол поворачивает направление на
    внешний угол (pi - theta_j) в своей плоскости в одну и ту же сторону; chi(0) = 0.
    Плоскости соседних углов повёрнуты вокруг общего отрезка на corner_twists,
    так что ломаная плоская только для двух углов.
    """
    if planar and not corners.is_planar_equal():
        raise DomainValidationError(FAIL_PLANAR_UNEQUAL)
    if not planar and any(abs(c.alpha_im) > 0 for c in corners.entries):
        logger.warning("complex alpha: torsion at corners is not embedded, using moduli only")

    thetas = [angle_from_alpha(c.modulus) for c in corners.entries]
    turns = np.array([math.pi - th for th in thetas])
    mid = len(thetas) // 2
    twists = corner_twists(corners)
    directions = _walk_directions(turns, twists, mid)

    theta = thetas[0] if thetas and corners.is_planar_equal() else None
    if not thetas:
        theta = math.pi

    poly = PolyLine(
        corners=corners,
        theta=theta,
        segment_directions=[UnitVec3.from_array(d) for d in directions],
        twists=[float(tw) for tw in twists],
        middle_index=mid,
    )
    vertices = polyline_point(poly, corners.positions) if len(corners) else np.zeros((0, 3))
    logger.debug(f"polyline built: {len(directions)} segments, theta={theta}, twists={poly.twists}")
    return poly.model_copy(update={"vertices": [tuple(map(float, v)) for v in vertices]})


def polyline_tangent(poly: PolyLine, x: np.ndarray | float) -> np.ndarray:
    """T(0, x) ломаной; в самой точке угла берётся правый предел."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.searchsorted(poly.corners.positions, x, side="right")
    return poly.directions_array()[idx]


def polyline_point(poly: PolyLine, x: np.ndarray | float) -> np.ndarray:
    """chi_0(x) = int_0^x T(0, s) ds."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    edges = np.concatenate([[-np.inf], poly.corners.positions, [np.inf]])
    points = np.zeros((x.size, 3))
    for k, direction in enumerate(poly.directions_array()):
        lo, hi = edges[k], edges[k + 1]
        length = np.clip(x, lo, hi) - np.clip(0.0, lo, hi)
        points += length[:, None] * direction
    return points


# ————————————————————————————————————————————————————————————
# Векторы роста
# ————————————————————————————————————————————————————————————

def _growth_bracket(directions: np.ndarray, n_half: int, m: int) -> np.ndarray:
    first = directions[0]
    last = directions[2 * n_half]
    return first - directions[m] - directions[2 * n_half - m] + last


def growth_vector_V(poly: PolyLine) -> GrowthVector:
    """
    V = i (-2/pi) log sin(theta/2) (T^{-inf} - 2T^0 + T^{+inf}) для двух углов.

    При theta = pi возвращается V = 0 с флагом degenerate.
    """
    if len(poly.corners) != 2:
        raise DomainValidationError(FAIL_TWO_CORNERS, corners=len(poly.corners))
    if poly.theta is None:
        raise DomainValidationError(FAIL_PLANAR_UNEQUAL)
    vector = _vector(poly, n_half=1, m=1)
    closed = vector.scale * 2.0 * (1.0 - math.cos(math.pi - poly.theta))
    return vector.model_copy(
        update={
            "closed_form_modulus": closed,
            "small_angle_modulus": 4.0 * math.pi * vector.scale * vector.scale,
        }
    )


def growth_vector_Vm(poly: PolyLine, m: int) -> GrowthVector:
    """Телескопированный V_m для 2N углов в точках -2N+1, ..., 2N-1."""
    count = len(poly.corners)
    n_half = count // 2
    expected = symmetric_positions(n_half)
    if count == 0 or count % 2 or list(poly.corners.positions.astype(int)) != expected:
        raise DomainValidationError(FAIL_CORNER_LAYOUT, positions=poly.corners.positions.tolist())
    if not 1 <= m <= n_half:
        raise DomainValidationError(FAIL_M_RANGE, m=m, n=n_half)
    if poly.theta is None:
        raise DomainValidationError(FAIL_PLANAR_UNEQUAL)
    return _vector(poly, n_half=n_half, m=m)


def _vector(poly: PolyLine, n_half: int, m: int) -> GrowthVector:
    scale = (-2.0 / math.pi) * math.log(math.sin(poly.theta / 2.0))
    bracket = _growth_bracket(poly.directions_array(), n_half, m)
    degenerate = scale == 0.0 or float(np.linalg.norm(bracket)) < 1e-14
    if degenerate:
        logger.info(f"growth vector is degenerate (theta={poly.theta}, m={m})")
    return GrowthVector(
        real_part=tuple(float(c) for c in bracket),
        scale=scale,
        m=m,
        degenerate=degenerate,
    )


# ————————————————————————————————————————————————————————————
# Кривизна и кручение
# ————————————————————————————————————————————————————————————

def curvature_torsion_from_u(
    u: complex | np.ndarray,
    theta_x: float | np.ndarray,
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """
    Полярная форма u = rho e^{i phi}: кривизна rho, кручение phi_x.

    При u = 0 кручение не определено и возвращается NaN.
    """
    curvature = np.abs(u)
    torsion = np.where(curvature > 0, theta_x, np.nan)
    if np.ndim(curvature) == 0:
        return float(curvature), float(torsion)
    return curvature, torsion


def phase_derivative(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Производная развёрнутой фазы по x (центральные разности)."""
    return np.gradient(np.unwrap(np.angle(u)), x)
