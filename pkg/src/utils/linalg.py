"""
Общие численные примитивы для линейных систем на группе вращений.

Все системы рамок в лаборатории имеют вид Y' = Y·Ω(s), где столбцы Y - векторы
рамки, а Ω - кососимметричная 3x3 матрица. Для таких систем пропагатор шага RK4
строится сразу для всех шагов, после чего рамки получаются префиксным
произведением.
"""
import numpy as np
from scipy.spatial.transform import Rotation

IDENTITY3 = np.eye(3)


def normalize(v: np.ndarray) -> np.ndarray:
    """Нормировка по последней оси."""
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def gram_schmidt(mats: np.ndarray) -> np.ndarray:
    """Ортонормирует столбцы матриц (..., 3, 3) процессом Грама - Шмидта."""
    c0 = mats[..., :, 0]
    c1 = mats[..., :, 1]
    c2 = mats[..., :, 2]
    q0 = normalize(c0)
    q1 = normalize(c1 - np.sum(q0 * c1, axis=-1, keepdims=True) * q0)
    q2 = (
        c2
        - np.sum(q0 * c2, axis=-1, keepdims=True) * q0
        - np.sum(q1 * c2, axis=-1, keepdims=True) * q1
    )
    q2 = normalize(q2)
    return np.stack([q0, q1, q2], axis=-1)


def orthonormality_defect(mats: np.ndarray) -> np.ndarray:
    """max |M^T M - I| для каждой матрицы стека."""
    gram = np.swapaxes(mats, -1, -2) @ mats
    return np.max(np.abs(gram - IDENTITY3), axis=(-2, -1))


def skew_from_components(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """
    Кососимметричная матрица с Ω[1,0] = p, Ω[2,0] = q, Ω[2,1] = r.

    При Y' = Y·Ω это означает: col0' = p·col1 + q·col2, col1' = -p·col0 + r·col2,
    col2' = -q·col0 - r·col1.
    """
    p = np.asarray(p, dtype=float)
    omega = np.zeros(p.shape + (3, 3))
    omega[..., 1, 0] = p
    omega[..., 0, 1] = -p
    omega[..., 2, 0] = q
    omega[..., 0, 2] = -q
    omega[..., 2, 1] = r
    omega[..., 1, 2] = -r
    return omega


def rk4_propagators(
    omega_left: np.ndarray,
    omega_mid: np.ndarray,
    omega_right: np.ndarray,
    h: float | np.ndarray,
) -> np.ndarray:
    """Матрицы шага RK4 для Y' = Y·Ω: Y(s+h) = Y(s)·P."""
    h = np.asarray(h, dtype=float)
    if h.ndim:
        h = h[:, None, None]
    k1 = omega_left
    k2 = (IDENTITY3 + 0.5 * h * k1) @ omega_mid
    k3 = (IDENTITY3 + 0.5 * h * k2) @ omega_mid
    k4 = (IDENTITY3 + h * k3) @ omega_right
    return IDENTITY3 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def prefix_products(props: np.ndarray) -> np.ndarray:
    """
    Q[0] = I, Q[k] = P[0]·P[1]···P[k-1] (порядок слева направо).

    Сканирование Хиллиса - Стила: log2(K) проходов пакетного matmul.
    """
    acc = np.array(props, dtype=float, copy=True)
    offset = 1
    count = acc.shape[0]
    while offset < count:
        acc[offset:] = acc[:-offset] @ acc[offset:]
        offset *= 2
    out = np.empty((count + 1, 3, 3))
    out[0] = IDENTITY3
    out[1:] = acc
    return out


def slerp(a: np.ndarray, b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Геодезическая интерполяция единичных векторов a -> b, s в [0, 1]."""
    a = normalize(a)
    b = normalize(b)
    s = np.asarray(s, dtype=float)[..., None]
    cos_w = np.clip(np.dot(a, b), -1.0, 1.0)
    omega = np.arccos(cos_w)
    if omega < 1e-14:
        return np.broadcast_to(a, s.shape[:-1] + (3,)).copy()
    sin_w = np.sin(omega)
    return (np.sin((1.0 - s) * omega) * a + np.sin(s * omega) * b) / sin_w


def angle_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Угол между векторами (устойчивая формула через atan2)."""
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(np.asarray(a) * np.asarray(b), axis=-1)
    return np.arctan2(cross, dot)


def rotation_about(axis: np.ndarray, phi: float) -> np.ndarray:
    """Поворот на угол phi вокруг единичной оси axis (правило правой руки)."""
    return Rotation.from_rotvec(phi * np.asarray(axis, dtype=float)).as_matrix()
