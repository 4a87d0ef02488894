"""
Фурье-образ T_x, резонансные окна и проверка логарифмического роста.

Знак ядра фиксирован: T_x^(t, xi) = int e^{+i 2 pi x xi} T_x(t, x) dx. Так как T_x
вещественно, T_x^(-xi) = conj(T_x^(xi)).
"""
import math
from collections.abc import Callable, Sequence

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from scipy import fft as sp_fft
from scipy.integrate import trapezoid
from scipy.stats import linregress

from src.core import settings
from src.core.constant import (
    FAIL_ADMISSIBLE_EMPTY,
    FAIL_EXCISION,
    FAIL_NO_CALIBRATION,
    FAIL_PLANAR_UNEQUAL,
    FAIL_SAMPLER_GRID,
    FAIL_SNAP_8PI,
    FAIL_TIME_POSITIVE,
    FAIL_UNDERSAMPLED,
    FAIL_WINDOW_M,
    FAIL_XI_NO_INTERVALS,
)
from src.core.errors import (
    AdmissibilityError,
    DomainValidationError,
    FilamentLabError,
    RefinementError,
)
from src.schemas.ansatz import AnsatzField
from src.schemas.calibration import Calibration, CalibrationEntry, Tolerances
from src.schemas.common import complex_vec_to_reals
from src.schemas.frame import Frame, FrameField, SpaceGrid
from src.schemas.geometry import CornerData, GrowthVector, PolyLine
from src.schemas.spectrum import (
    GrowthEntry,
    GrowthReport,
    ScanPoint,
    SlopeFit,
    Spectrum,
    Window,
    XiInterval,
    XiReport,
)
from src.services import ansatz, hasimoto
from src.services.geometry import (
    alpha_from_angle,
    growth_vector_V,
    growth_vector_Vm,
    polyline_tangent,
)
from src.utils.init_calibration import load_calibration
from src.utils.parallel import run_jobs

Sampler = Callable[[np.ndarray], np.ndarray]

DELTA_FACTORS = (0.0, 0.5, -0.5)
OFFWINDOW_FACTORS = (0.0, 0.2)
OFFWINDOW_GAP = 0.75
PANEL_NODES = 8
MAX_PANEL = 0.25
XI_INTERVALS = 8
MAX_REQUIRED_N = 1 << 16


# ————————————————————————————————————————————————————————————
# Сетка и усечение
# ————————————————————————————————————————————————————————————

def default_truncation(corners: CornerData) -> float:
    """L = max|j| + 2N + extra_length для 2N углов."""
    positions = corners.positions
    reach = float(np.max(np.abs(positions))) if positions.size else 0.0
    half = max(1, math.ceil(len(corners) / 2))
    return reach + 2.0 * half + settings.extra_length


def taper_weights(x: np.ndarray, L: float, width: float) -> np.ndarray:
    """Приподнятый косинус: 1 на |x| <= L - width, 0 при |x| >= L."""
    x = np.abs(np.asarray(x, dtype=float))
    inner = L - width
    ramp = np.clip((x - inner) / width, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(math.pi * ramp))


def required_step(field: AnsatzField, t: float, L: float, xi_max: float) -> float:
    """
    Шаг, разрешающий и поворот фазы u, и осцилляции подынтегрального выражения.

    Возвращается делитель L, чтобы узлы попадали в 0 и в +-L.
    """
    active = field.positions[np.abs(field.alphas) > 0]
    reach = L + (float(np.max(np.abs(active))) if active.size else 0.0)
    k_max = reach / (2.0 * t) if active.size else 0.0
    rate = k_max + 2.0 * math.pi * abs(xi_max)
    steps = [settings.frame_keep_step]
    if k_max > 0:
        steps.append(settings.oscillation_threshold * (1.0 - 1e-9) / k_max)
    if rate > 0:
        steps.append(math.pi / (settings.resolution_factor * rate))
    step = min(steps)
    return L / math.ceil(L / step)


# ————————————————————————————————————————————————————————————
# Окна
# ————————————————————————————————————————————————————————————

def xi_window(m: int, t: float, n: int) -> list[Window]:
    """Окна +-m/(2 pi t) радиуса 1/n."""
    if m < 1:
        raise DomainValidationError(FAIL_WINDOW_M, m=m)
    if not t > 0:
        raise DomainValidationError(FAIL_TIME_POSITIVE, t=t)
    center = m / (2.0 * math.pi * t)
    return [
        Window(m=m, sign=1, center=center, radius=1.0 / n),
        Window(m=m, sign=-1, center=-center, radius=1.0 / n),
    ]


def tag_windows(t: float, xi: np.ndarray, n: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Для каждой частоты - (m, sign) окна, в которое она попадает, иначе (0, 0)."""
    xi = np.asarray(xi, dtype=float)
    if not t > 0 or n is None:
        return np.zeros(xi.shape, dtype=int), np.zeros(xi.shape, dtype=int)
    m = np.rint(np.abs(xi) * 2.0 * math.pi * t).astype(int)
    sign = np.sign(xi).astype(int)
    distance = np.abs(xi - sign * m / (2.0 * math.pi * t))
    hit = (m >= 1) & (distance <= 1.0 / n)
    return np.where(hit, m, 0), np.where(hit, sign, 0)


def _overlaps_window(lo: float, hi: float, t: float, radius: float) -> bool:
    if not t > 0:
        return False
    scale = 2.0 * math.pi * t
    for a, b in ((lo, hi), (-hi, -lo)):
        if b <= 0:
            continue
        m_lo = max(1, math.ceil((max(a, 0.0) - radius) * scale))
        m_hi = math.floor((b + radius) * scale)
        if m_hi >= m_lo:
            return True
    return False


def resonance_orders(corners: CornerData) -> int:
    """Наибольший m с парой углов r - j = 2m (не меньше 1)."""
    positions = _active_positions(corners)
    if len(positions) < 2:
        return 1
    return max(1, (max(positions) - min(positions)) // 2)


def offwindow_mask(t: float, xi: np.ndarray, m_max: int = 1) -> np.ndarray:
    """|4 pi t xi -+ 2m| >= 3/4 для всех m = 1..m_max и обоих знаков."""
    scaled = np.abs(4.0 * math.pi * t * np.asarray(xi, dtype=float))
    mask = np.ones(scaled.shape, dtype=bool)
    for m in range(1, m_max + 1):
        mask &= np.abs(scaled - 2.0 * m) >= OFFWINDOW_GAP
    return mask


def offwindow_frequencies(t: float, m_max: int = 1, samples: int = 0, seed: int = 0) -> list[float]:
    """
    Частоты посередине между центрами окон (и у нуля).

    samples > 0 добавляет столько частот, выбранных равномерно из промежутков
    между окнами генератором с зерном seed.
    """
    factors = list(OFFWINDOW_FACTORS) + [k + 0.5 for k in range(m_max + 1)]
    rng = np.random.default_rng(seed)
    limit = m_max + 0.5
    extra = []
    while len(extra) < samples:
        c = float(rng.uniform(-limit, limit))
        nearest = round(abs(c))
        if nearest == 0 or abs(abs(c) - nearest) >= 0.5 * OFFWINDOW_GAP:
            extra.append(c)
    return [c / (2.0 * math.pi * t) for c in factors + extra]

# ————————————————————————————————————————————————————————————
# Квадратура
# ————————————————————————————————————————————————————————————

def _add_block(
    sums: tuple[np.ndarray, np.ndarray],
    x: np.ndarray,
    tx: np.ndarray,
    index: np.ndarray,
    xi: np.ndarray,
    L: float,
    taper: float,
    dx: float,
) -> None:
    """Добавляет вклад блока узлов: полный шаг и вдвое более грубая сетка (чётные узлы)."""
    fine, coarse = sums
    weights = taper_weights(x, L, taper) * dx
    kernel = np.exp(2j * math.pi * np.outer(x, xi)) * weights[:, None]
    fine += kernel.T @ tx
    even = index % 2 == 0
    coarse += 2.0 * (kernel[even].T @ tx[even])


def _finish(
    sums: tuple[np.ndarray, np.ndarray],
    t: float,
    xi: np.ndarray,
    L: float,
    taper: float,
    dx: float,
    n: int | None,
    check: bool,
) -> Spectrum:
    fine, coarse = sums
    scale = max(1.0, float(np.max(np.linalg.norm(fine, axis=1)))) if fine.size else 1.0
    error = float(np.max(np.linalg.norm(fine - coarse, axis=1))) / scale if fine.size else 0.0
    if check and error > load_calibration().tolerances.two_grid_rel:
        raise RefinementError(FAIL_UNDERSAMPLED, suggested_step=0.5 * dx, two_grid_error=error)
    window_m, window_sign = tag_windows(t, xi, n)
    return Spectrum(
        t=t,
        xi=xi,
        values=fine,
        window_m=window_m,
        window_sign=window_sign,
        truncation=L,
        taper=taper,
        two_grid_error=error,
    )


def fourier_transform_Tx(
    source: FrameField | Sampler,
    xi_values: Sequence[float] | np.ndarray,
    L: float | None = None,
    taper: float | None = None,
    *,
    t: float | None = None,
    dx: float | None = None,
    n: int | None = None,
    check: bool = True,
) -> Spectrum:
    """
    Прямая квадратура int w(x) e^{i 2 pi x xi} T_x dx на [-L, L] для набора частот.

    source - поле рамок (используется его T_x) или функция x -> T_x(x) формы (k, 3);
    для функции обязательны L и dx. Расхождение с сеткой 2 dx сверх допуска
    считается недоразрешением.
    """
    xi = np.atleast_1d(np.asarray(xi_values, dtype=float))
    taper = taper or settings.taper_width
    sums = (np.zeros((xi.size, 3), dtype=complex), np.zeros((xi.size, 3), dtype=complex))

    if isinstance(source, FrameField):
        t = source.t if t is None else t
        dx = source.dx
        L = L or float(min(abs(source.x[0]), abs(source.x[-1])))
        index = np.arange(source.x.size)
        inside = np.abs(source.x) <= L + 1e-12
        chunk = settings.chunk_size
        sel = np.nonzero(inside)[0]
        for start in range(0, sel.size, chunk):
            part = sel[start:start + chunk]
            _add_block(sums, source.x[part], source.tx[part], index[part], xi, L, taper, dx)
    else:
        if L is None or dx is None:
            raise DomainValidationError(FAIL_SAMPLER_GRID, L=L, dx=dx)
        count = int(round(2.0 * L / dx))
        chunk = settings.chunk_size
        for start in range(0, count + 1, chunk):
            index = np.arange(start, min(start + chunk, count + 1))
            x = -L + dx * index
            tx = np.asarray(source(x), dtype=float).reshape(x.size, 3)
            _add_block(sums, x, tx, index, xi, L, taper, dx)
        t = 0.0 if t is None else t

    return _finish(sums, t, xi, L, taper, dx, n, check)


def stream_transform(
    field: AnsatzField,
    t: float,
    xi_values: Sequence[float] | np.ndarray,
    L: float | None = None,
    taper: float | None = None,
    dx: float | None = None,
    n: int | None = None,
    check: bool = True,
) -> tuple[Spectrum, FrameField]:
    """
    Квадратура по ходу марша рамок от канонической рамки в x = 0 без хранения всей сетки.

    Возвращает спектр и прореженное поле рамок (шаг frame_keep_step) для
    выравнивания и предиктора.
    """
    xi = np.atleast_1d(np.asarray(xi_values, dtype=float))
    L = L or default_truncation(field.corners)
    taper = taper or settings.taper_width
    dx = dx or required_step(field, t, L, float(np.max(np.abs(xi))) if xi.size else 0.0)
    L = dx * round(L / dx)
    stride = max(1, int(round(settings.frame_keep_step / dx)))
    sums = (np.zeros((xi.size, 3), dtype=complex), np.zeros((xi.size, 3), dtype=complex))

    start = np.eye(3)
    u0 = np.array([ansatz.eval_u(field, t, 0.0)])
    tx0 = hasimoto.tangent_derivative(start[None], u0)
    _add_block(sums, np.zeros(1), tx0, np.zeros(1, dtype=int), xi, L, taper, dx)

    kept: dict[int, list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = {1: [], -1: []}
    drift = 0.0
    for sign, end in ((1, L), (-1, -L)):
        offset = 0
        for xs, frames, u, block_drift in hasimoto.iter_space_march(field, t, start, 0.0, end, dx):
            tx = hasimoto.tangent_derivative(frames, u)
            index = offset + 1 + np.arange(xs.size)
            _add_block(sums, xs, tx, index, xi, L, taper, dx)
            keep = index % stride == 0
            kept[sign].append((xs[keep], frames[keep], tx[keep]))
            offset += xs.size
            drift = max(drift, block_drift)

    empty = (np.zeros(0), np.zeros((0, 3, 3)), np.zeros((0, 3)))

    def _stack(sign: int, k: int) -> np.ndarray:
        parts = [block[k] for block in kept[sign]]
        return np.concatenate(parts) if parts else empty[k]

    thin = FrameField(
        t=t,
        x=np.concatenate([_stack(-1, 0)[::-1], [0.0], _stack(1, 0)]),
        frames=np.concatenate([_stack(-1, 1)[::-1], start[None], _stack(1, 1)]),
        tx=np.concatenate([_stack(-1, 2)[::-1], tx0, _stack(1, 2)]),
        max_drift=drift,
    )
    spectrum = _finish(sums, t, xi, L, taper, dx, n, check)
    logger.debug(
        f"streamed transform t={t:.3e}: dx={dx:.3e}, {int(round(2 * L / dx)) + 1} nodes, "
        f"{xi.size} frequencies, two-grid={spectrum.two_grid_error:.2e}, drift={drift:.2e}"
    )
    return spectrum, thin


def fft_spectrum(
    field: FrameField,
    L: float | None = None,
    taper: float | None = None,
    samples_per_unit: int | None = None,
    xi_max: float | None = None,
    n: int | None = None,
) -> Spectrum:
    """
    Полный спектр через scipy.fft с дополнением нулями до шага 1/samples_per_unit по xi.

    Сумма sum_k f_k e^{i 2 pi x_k xi} - это обратное ДПФ, умноженное на длину.
    """
    taper = taper or settings.taper_width
    samples_per_unit = samples_per_unit or settings.xi_samples_per_unit
    L = L or float(min(abs(field.x[0]), abs(field.x[-1])))
    sel = np.abs(field.x) <= L + 1e-12
    x = field.x[sel]
    dx = field.dx
    weighted = field.tx[sel] * (taper_weights(x, L, taper) * dx)[:, None]

    n_fft = sp_fft.next_fast_len(max(x.size, int(math.ceil(samples_per_unit / dx))))
    freqs = sp_fft.fftfreq(n_fft, dx)
    keep = np.abs(freqs) <= xi_max if xi_max is not None else np.ones(n_fft, dtype=bool)
    values = np.empty((int(keep.sum()), 3), dtype=complex)
    for c in range(3):
        values[:, c] = (sp_fft.ifft(weighted[:, c], n=n_fft) * n_fft)[keep]
    values *= np.exp(2j * math.pi * x[0] * freqs[keep])[:, None]

    order = np.argsort(freqs[keep])
    xi = freqs[keep][order]
    window_m, window_sign = tag_windows(field.t, xi, n)
    return Spectrum(
        t=field.t,
        xi=xi,
        values=values[order],
        window_m=window_m,
        window_sign=window_sign,
        truncation=L,
        taper=taper,
    )


# ————————————————————————————————————————————————————————————
# Резонансы и предиктор
# ————————————————————————————————————————————————————————————

def _active_positions(corners: CornerData) -> list[int]:
    return [c.pos for c in corners.entries if c.modulus > 0]


def resonant_pairs(t: float, xi: float, n: int, corners: CornerData) -> list[tuple[int, int]]:
    """Пары (j, r) с |j - r + 4 pi t xi| < 2 n t."""
    shift = 4.0 * math.pi * t * xi
    bound = 2.0 * n * t
    positions = _active_positions(corners)
    return [(j, r) for j in positions for r in positions if abs(j - r + shift) < bound]


def _segments(lo: float, hi: float, holes: Sequence[float], radius: float, breaks: Sequence[float]) -> list[tuple[float, float]]:
    """[lo, hi] без окрестностей radius точек holes, с разбиением в точках breaks."""
    cuts = {lo, hi}
    for p in holes:
        cuts.update({p - radius, p + radius})
    cuts.update(breaks)
    points = sorted(c for c in cuts if lo <= c <= hi)
    out = []
    for a, b in zip(points, points[1:]):
        mid = 0.5 * (a + b)
        if b > a and all(abs(mid - p) > radius for p in holes):
            out.append((a, b))
    return out


def _panel_nodes(lo: float, hi: float, singular: Sequence[float], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Составной Гаусс - Лежандр с геометрическим сгущением к особым точкам."""
    edges = {lo, hi}
    for s in singular:
        d = 1.0 / n
        while d < (hi - lo) + abs(s - lo) + abs(s - hi):
            for e in (s - d, s + d):
                if lo < e < hi:
                    edges.add(e)
            d *= 2.0
    edges = np.array(sorted(edges))
    refined = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        pieces = max(1, int(math.ceil((b - a) / MAX_PANEL)))
        refined.extend(np.linspace(a, b, pieces + 1)[1:])
    edges = np.array(refined)
    nodes, weights = leggauss(PANEL_NODES)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    w = 0.5 * (b - a) * weights
    return x.ravel(), w.ravel()


def _pair_terms(
    t: float,
    xi: float,
    n: int,
    field: AnsatzField,
) -> list[tuple[complex, float, float, float]]:
    """(коэффициент, a, b, частота) для каждой резонансной пары."""
    amps = dict(zip(field.positions.astype(int).tolist(), ansatz.amplitudes(field, t)))
    shift = 4.0 * math.pi * t * xi
    terms = []
    for j, r in resonant_pairs(t, xi, n, field.corners):
        coeff = np.conj(amps[j]) * amps[r] * np.exp(-1j * (j * j - r * r) / (4.0 * t))
        terms.append((complex(coeff), j + shift, r - shift, (j - r + shift) / (2.0 * t)))
    return terms


def _region(a: float, b: float, domain: tuple[float, float], region: str) -> tuple[float, float]:
    lo, hi = domain
    if region == "local":
        center = 0.5 * (a + b)
        radius = 0.5 * abs(a - b) + 1.0
        lo, hi = max(lo, center - radius), min(hi, center + radius)
    return lo, hi


def resonant_predictor(
    t: float,
    xi: float,
    n: int,
    field: AnsatzField,
    tangent: FrameField | PolyLine,
    region: str = "full",
    L: float | None = None,
) -> np.ndarray:
    """
    i sum conj(A_j) A_r e^{-i(j^2-r^2)/4t} int e^{i x (j-r+4 pi t xi)/2t}
    (1/(x-a) - 1/(x-b)) T dx, a = j + 4 pi t xi, b = r - 4 pi t xi, |x-a|, |x-b| > 1/n.

    tangent - поле рамок (T интерполируется) или ломаная (замороженное T(0, x)).
    region="local" ограничивает интеграл окрестностью |x - (a+b)/2| < |a-b|/2 + 1.
    """
    if isinstance(tangent, PolyLine):
        L = L or default_truncation(field.corners)
        domain = (-L, L)
        breaks = tangent.corners.positions.tolist()

        def sample(x: np.ndarray) -> np.ndarray:
            return polyline_tangent(tangent, x)
    else:
        if 1.0 / n < tangent.dx:
            raise RefinementError(FAIL_EXCISION, suggested_step=0.5 / n, dx=tangent.dx)
        domain = (float(tangent.x[0]), float(tangent.x[-1]))
        breaks = []
        sample = tangent.tangent_at

    total = np.zeros(3, dtype=complex)
    for coeff, a, b, freq in _pair_terms(t, xi, n, field):
        lo, hi = _region(a, b, domain, region)
        for s0, s1 in _segments(lo, hi, (a, b), 1.0 / n, breaks):
            x, w = _panel_nodes(s0, s1, (a, b), n)
            kernel = np.exp(1j * freq * x) * (1.0 / (x - a) - 1.0 / (x - b))
            total += coeff * ((w * kernel) @ sample(x))
    return 1j * total


def frozen_boundary_sum(
    t: float,
    xi: float,
    n: int,
    field: AnsatzField,
    poly: PolyLine,
    region: str = "local",
    L: float | None = None,
) -> np.ndarray:
    """
    Тот же предиктор при T = T(0, x) без линейной фазы: на каждом отрезке ломаной
    интеграл ядра равен [log|x-a| - log|x-b|].
    """
    L = L or default_truncation(field.corners)
    breaks = poly.corners.positions.tolist()
    total = np.zeros(3, dtype=complex)
    for coeff, a, b, _ in _pair_terms(t, xi, n, field):
        lo, hi = _region(a, b, (-L, L), region)
        for s0, s1 in _segments(lo, hi, (a, b), 1.0 / n, breaks):
            primitive = (
                math.log(abs(s1 - a)) - math.log(abs(s1 - b))
                - math.log(abs(s0 - a)) + math.log(abs(s0 - b))
            )
            direction = polyline_tangent(poly, 0.5 * (s0 + s1))[0]
            total += coeff * primitive * direction
    return 1j * total


# ————————————————————————————————————————————————————————————
# Плотность энергии и оценка вне окон
# ————————————————————————————————————————————————————————————

def xi_intervals(spectrum: Spectrum, k_values: Sequence[int], n: int | None = None) -> tuple[list[XiInterval], list[int]]:
    """int_k^{k+1} |T_x^|^2 dxi по интервалам вне окон; пересекающие окна исключаются."""
    power = np.sum(np.abs(spectrum.values) ** 2, axis=1)
    radius = 1.0 / n if n else 0.0
    intervals, excluded = [], []
    for k in k_values:
        sel = (spectrum.xi >= k) & (spectrum.xi <= k + 1)
        if _overlaps_window(k, k + 1, spectrum.t, radius) or np.count_nonzero(sel) < 2:
            excluded.append(int(k))
            continue
        intervals.append(XiInterval(k=int(k), value=float(trapezoid(power[sel], spectrum.xi[sel]))))
    if excluded:
        logger.info(f"Xi: excluded intervals {excluded}")
    return intervals, excluded


def energy_density_Xi(spectrum: Spectrum, k_values: Sequence[int], n: int | None = None) -> float:
    intervals, excluded = xi_intervals(spectrum, k_values, n)
    if not intervals:
        raise DomainValidationError(FAIL_XI_NO_INTERVALS, excluded=excluded)
    return float(np.mean([i.value for i in intervals]))


def default_xi_range(field: AnsatzField, t: float, L: float, taper: float) -> list[int]:
    """Последние XI_INTERVALS интервалов, для которых стационарные точки j +- 4 pi t xi внутри плато."""
    positions = field.positions
    reach = float(np.max(np.abs(positions))) if positions.size else 0.0
    k_top = math.floor((L - taper - reach) / (4.0 * math.pi * t)) - 1
    if k_top < 1:
        raise DomainValidationError(FAIL_XI_NO_INTERVALS, t=t, L=L)
    return list(range(max(1, k_top - XI_INTERVALS + 1), k_top + 1))


def xi_report(
    field: AnsatzField,
    t: float,
    k_values: Sequence[int] | None = None,
    n: int | None = None,
) -> XiReport:
    """Xi по полному спектру поля рамок в момент t и сравнение с 4 pi M."""
    L = default_truncation(field.corners)
    taper = settings.taper_width
    k_values = list(k_values) if k_values is not None else default_xi_range(field, t, L, taper)
    xi_max = float(max(k_values) + 1)
    dx = required_step(field, t, L, xi_max)
    frames = hasimoto.integrate_frame_in_space(
        field, t, Frame.canonical(), SpaceGrid(x_min=-L, x_max=L, dx=dx)
    )
    spectrum = fft_spectrum(frames, L, taper, xi_max=xi_max, n=n)
    intervals, excluded = xi_intervals(spectrum, k_values, n)
    if not intervals:
        raise DomainValidationError(FAIL_XI_NO_INTERVALS, excluded=excluded)
    measured = float(np.mean([i.value for i in intervals]))
    target = 4.0 * math.pi * field.mass
    rel_err = abs(measured - target) / target if target > 0 else measured
    tolerance = load_calibration().tolerances.xi_rel
    logger.info(f"Xi at t={t}: measured={measured:.6f}, target={target:.6f}, rel_err={rel_err:.3f}")
    return XiReport(
        t=t,
        target=target,
        measured=measured,
        rel_err=rel_err,
        intervals=intervals,
        excluded=excluded,
        within_tolerance=rel_err <= tolerance if target > 0 else measured <= 1e-12,
    )


def offwindow_sup(t: float, spectrum: Spectrum, m_max: int = 1) -> float:
    """sup |T_x^| по частотам спектра вне всех окон m = 1..m_max."""
    mask = offwindow_mask(t, spectrum.xi, m_max)
    if not mask.any():
        return 0.0
    return float(np.max(spectrum.magnitudes[mask]))


def offwindow_check(t: float, spectrum: Spectrum, n: int, m_max: int = 1) -> float:
    """sup |T_x^| * sqrt(t n^2) по частотам вне окон."""
    return offwindow_sup(t, spectrum, m_max) * math.sqrt(t * n * n)

# ————————————————————————————————————————————————————————————
# Допустимые времена
# ————————————————————————————————————————————————————————————

def calibration_entry(theta: float, corners: int = 2, calibration: Calibration | None = None) -> CalibrationEntry:
    """Константы для theta: линейная интерполяция между калиброванными углами."""
    calibration = calibration or load_calibration()
    entries = calibration.for_corners(corners)
    if not entries:
        raise DomainValidationError(FAIL_NO_CALIBRATION, corners=corners)
    thetas = [e.theta for e in entries]
    for edge in (thetas[0], thetas[-1]):
        if math.isclose(theta, edge, rel_tol=1e-12, abs_tol=1e-12):
            theta = edge
    if not thetas[0] <= theta <= thetas[-1]:
        logger.warning(f"theta={theta:.4f} outside calibrated range, using nearest entry")
    if theta <= thetas[0]:
        return entries[0]
    if theta >= thetas[-1]:
        return entries[-1]
    k = int(np.searchsorted(thetas, theta))
    lo, hi = entries[k - 1], entries[k]
    s = (theta - lo.theta) / (hi.theta - lo.theta)

    def mix(name: str) -> float:
        return (1.0 - s) * getattr(lo, name) + s * getattr(hi, name)

    return CalibrationEntry(
        theta=theta,
        corners=lo.corners,
        t_theta=mix("t_theta"),
        t_tilde_theta=mix("t_tilde_theta"),
        n_theta=max(lo.n_theta, hi.n_theta),
        c_lower=mix("c_lower"),
        c_upper=mix("c_upper"),
    )


def _tau_bounds(entry: CalibrationEntry, alpha: float, n: int) -> tuple[float, float]:
    log_n = math.log(n)
    lower = entry.t_tilde_theta / (log_n * log_n)
    upper = entry.t_theta
    cap = 1.0 / (4.0 * math.pi)
    if alpha > 0:
        root_lower = entry.c_lower * (alpha + alpha**3 / n) / (alpha**4 * log_n)
        lower = max(lower, root_lower * root_lower)
        cap = min(entry.c_upper * alpha, cap)
    return lower, min(upper, cap * cap)


def admissible_interval(
    theta: float,
    n: int,
    corners: int = 2,
    calibration: Calibration | None = None,
) -> tuple[float, float]:
    """Интервал tau = t n^2, на котором выполнены условия на время."""
    entry = calibration_entry(theta, corners, calibration)
    if n < entry.n_theta:
        raise AdmissibilityError(FAIL_ADMISSIBLE_EMPTY, required_n=entry.n_theta, n=n)
    return _tau_bounds(entry, alpha_from_angle(theta), n)


def snap_to_8pi(t: float, t_lo: float, t_hi: float) -> float:
    """Ближайшее к t время с 1/t = 8 pi k внутри (t_lo, t_hi)."""
    k0 = 1.0 / (8.0 * math.pi * t)
    for k in sorted({math.floor(k0), math.ceil(k0), round(k0)}, key=lambda k: abs(k - k0)):
        if k < 1:
            continue
        snapped = 1.0 / (8.0 * math.pi * k)
        if t_lo < snapped < t_hi:
            return snapped
    raise AdmissibilityError(FAIL_SNAP_8PI, t=t, t_lo=t_lo, t_hi=t_hi)


def admissible_time(
    theta: float,
    n: int,
    snap_8pi: bool = False,
    corners: int = 2,
    calibration: Calibration | None = None,
) -> float:
    """t = tau*/n^2, tau* - среднее геометрическое концов допустимого интервала."""
    lo, hi = admissible_interval(theta, n, corners, calibration)
    if not lo < hi:
        entry = calibration_entry(theta, corners, calibration)
        alpha = alpha_from_angle(theta)
        required = next(
            (k for k in range(n + 1, MAX_REQUIRED_N) if _tau_bounds(entry, alpha, k)[0] < _tau_bounds(entry, alpha, k)[1]),
            None,
        )
        raise AdmissibilityError(FAIL_ADMISSIBLE_EMPTY, required_n=required, n=n, tau_lower=lo, tau_upper=hi)
    tau = math.sqrt(lo * hi)
    t = tau / (n * n)
    if snap_8pi:
        t = snap_to_8pi(t, lo / (n * n), hi / (n * n))
    logger.debug(f"admissible t for theta={theta:.4f}, n={n}: {t:.6e} (tau in ({lo:.3e}, {hi:.3e}))")
    return t


# ————————————————————————————————————————————————————————————
# Сканирование роста
# ————————————————————————————————————————————————————————————

def growth_target(poly: PolyLine, m: int = 1) -> GrowthVector:
    """V для двух углов, V_m для 2N углов; без взаимодействия углов - вырожденный нуль."""
    count = len(poly.corners)
    if poly.theta is None:
        raise DomainValidationError(FAIL_PLANAR_UNEQUAL)
    if count == 2:
        return growth_vector_V(poly)
    if count < 2:
        scale = poly.corners.mass
        return GrowthVector(real_part=(0.0, 0.0, 0.0), scale=scale, m=m, degenerate=True)
    return growth_vector_Vm(poly, m)


def _window_frequencies(t: float, n: int, m: int) -> list[tuple[int, float, float]]:
    center = m / (2.0 * math.pi * t)
    return [
        (sign, factor / n, sign * center + factor / n)
        for sign in (1, -1)
        for factor in DELTA_FACTORS
    ]


def scan_single_n(
    poly: PolyLine,
    n: int,
    m: int = 1,
    snap_8pi: bool = False,
    t: float | None = None,
    offwindow_samples: int = 0,
    seed: int = 0,
) -> tuple[ScanPoint, list[GrowthEntry], Spectrum | None]:
    """
    Одно n: допустимое t, спектр в окнах и вне их, сравнение с V log n.

    Явное t (калибровка) отменяет выбор допустимого времени; offwindow_samples и seed
    добавляют случайные частоты вне окон.
    """
    field = ansatz.make_field(poly.corners)
    target = growth_target(poly, m)
    corners = max(2, len(poly.corners))
    m_max = resonance_orders(poly.corners)
    fixed_t = t
    t = 0.0
    try:
        t = fixed_t if fixed_t is not None else admissible_time(poly.theta, n, snap_8pi, corners)
        windows = _window_frequencies(t, n, m)
        xi = [w[2] for w in windows] + offwindow_frequencies(t, m_max, offwindow_samples, seed)
        spectrum, thin = stream_transform(field, t, xi, n=n)
        aligned, alignment = hasimoto.align_to_polyline(thin, poly)
        spectrum = spectrum.rotated(alignment.matrix())

        log_n = math.log(n)
        band = 0.5 * target.modulus * log_n
        interacting = len(poly.corners) >= 2
        entries = []
        for k, (sign, delta, xi_k) in enumerate(windows):
            measured = spectrum.values[k]
            center = (target.value if sign > 0 else np.conj(target.value)) * log_n
            distance = float(np.linalg.norm(measured - center))
            lemma_error = None
            if interacting:
                predicted = resonant_predictor(t, xi_k, n, field, aligned)
                lemma_error = float(np.linalg.norm(measured - predicted))
            entries.append(
                GrowthEntry(
                    n=n,
                    t=t,
                    xi=xi_k,
                    sign=sign,
                    delta=delta,
                    measured=complex_vec_to_reals(measured),
                    center=complex_vec_to_reals(center),
                    center_mag=float(np.linalg.norm(center)),
                    band=band,
                    distance=distance,
                    passed=target.degenerate or distance <= band,
                    lemma_error=lemma_error,
                )
            )

        peak = float(np.max(spectrum.magnitudes[: len(windows)]))
        outside = offwindow_sup(t, spectrum, m_max)
        point = ScanPoint(
            n=n,
            t=t,
            tau=t * n * n,
            peak=peak,
            log_statistic=float(np.max(spectrum.magnitudes)) / abs(math.log(t)),
            offwindow=outside * math.sqrt(t * n * n),
            offwindow_sup=outside,
            lemma_error=max(e.lemma_error for e in entries) if interacting else None,
            alignment_angle=alignment.angle,
            alignment_rmsd=alignment.rmsd,
            two_grid_error=spectrum.two_grid_error,
        )
        logger.info(
            f"n={n}: t={t:.4e}, peak={peak:.4f}, center={target.modulus * log_n:.4f}, "
            f"band={band:.4f}, passed={all(e.passed for e in entries)}"
        )
        return point, entries, spectrum
    except FilamentLabError as exc:
        logger.warning(f"n={n}: scan failed: {exc.message} {exc.details}")
        return ScanPoint(n=n, t=t, tau=t * n * n, peak=0.0, log_statistic=0.0, error=exc.to_dict()), [], None


def trend_checks(points: Sequence[ScanPoint], degenerate: bool, tolerances: Tolerances | None = None) -> dict:
    """Тренды по соседним n: плоскость статистики вне окон, убывание ошибки предиктора, пик над фоном."""
    tolerances = tolerances or load_calibration().tolerances
    ok = sorted((p for p in points if p.error is None), key=lambda p: p.n)
    out: dict = {}

    stats = [p.offwindow for p in ok if p.offwindow]
    ratios = [max(a, b) / min(a, b) for a, b in zip(stats, stats[1:])]
    out["offwindow_ratios"] = ratios
    out["offwindow_flat"] = all(r < tolerances.offwindow_ratio for r in ratios) if ratios else None

    errors = [p.lemma_error for p in ok if p.lemma_error is not None]
    shrink = [a / b if b > 0 else math.inf for a, b in zip(errors, errors[1:])]
    out["lemma_shrink"] = shrink
    out["lemma_trend_ok"] = all(s >= tolerances.lemma_shrink for s in shrink) if shrink else None

    below = [p.offwindow_sup < p.peak for p in ok if p.offwindow_sup is not None]
    out["offwindow_below_peak"] = None if degenerate or not below else all(below)
    return out


def _slope_fit(points: list[ScanPoint], entries: list[GrowthEntry], target: GrowthVector) -> SlopeFit | None:
    centers = {e.n: e for e in entries if e.sign > 0 and e.delta == 0.0}
    ns = sorted(n for n in centers if not any(p.n == n and p.error for p in points))
    if len(ns) < 2:
        return None
    magnitudes = [float(np.linalg.norm(np.array(centers[n].measured))) for n in ns]
    fit = linregress(np.log(ns), magnitudes)
    modulus = target.modulus
    rel_err = abs(fit.slope - modulus) / modulus if modulus > 0 else abs(fit.slope)
    tolerance = load_calibration().tolerances.slope_rel
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        rvalue=float(fit.rvalue),
        target=modulus,
        rel_err=rel_err,
        within_tolerance=target.degenerate or rel_err <= tolerance,
    )


def scan_with_spectra(
    poly: PolyLine,
    n_values: Sequence[int],
    m: int = 1,
    snap_8pi: bool | None = None,
    workers: int | None = None,
    offwindow_samples: int = 0,
    seed: int = 0,
) -> tuple[GrowthReport, dict[int, Spectrum]]:
    target = growth_target(poly, m)
    snap = len(poly.corners) > 2 if snap_8pi is None else snap_8pi
    jobs = [(poly, int(n), m, snap, None, offwindow_samples, seed) for n in n_values]
    results = run_jobs(scan_single_n, jobs, workers or settings.workers)

    points = [r[0] for r in results]
    entries = [e for r in results for e in r[1]]
    spectra = {r[0].n: r[2] for r in results if r[2] is not None}
    report = GrowthReport(
        theta=poly.theta,
        N=len(poly.corners),
        m=m,
        V=complex_vec_to_reals(target.value),
        V_modulus=target.modulus,
        degenerate=target.degenerate,
        n_values=[int(n) for n in n_values],
        t_values=[p.t for p in points],
        entries=entries,
        points=points,
        slope_fit=_slope_fit(points, entries, target),
        **trend_checks(points, target.degenerate),
    )
    return report, spectra


def growth_scan(
    poly: PolyLine,
    n_values: Sequence[int],
    m: int = 1,
    snap_8pi: bool | None = None,
    workers: int | None = None,
    offwindow_samples: int = 0,
    seed: int = 0,
) -> GrowthReport:
    """Сканирование по n; сбои отдельных n записываются в отчёт, скан продолжается."""
    report, _ = scan_with_spectra(poly, n_values, m, snap_8pi, workers, offwindow_samples, seed)
    return report
