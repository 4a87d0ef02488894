import math

import numpy as np
from loguru import logger

from src.cli.dependencies import polyline_from_config
from src.cli.router import CommandRouter
from src.core import settings
from src.core.constant import FAIL_ADMISSIBLE_EMPTY
from src.core.errors import AdmissibilityError
from src.core.events import RunContext
from src.schemas.calibration import Calibration, CalibrationEntry
from src.schemas.run import CalibrateConfig
from src.services.geometry import alpha_from_angle
from src.services.spectral import scan_single_n
from src.utils.init_calibration import read_calibration, save_calibration
from src.utils.io import write_json
from src.utils.parallel import run_jobs

router = CommandRouter()


def entry_from_passing(theta: float, corners: int, taus: list[float], n_values: list[int]) -> CalibrationEntry:
    """
    Константы, при которых допустимый интервал совпадает с [min tau, max tau] прошедших точек
    для наименьшего n.
    """
    alpha = alpha_from_angle(theta)
    n_min = min(n_values)
    log_n = math.log(n_min)
    lo, hi = min(taus), max(taus)
    return CalibrationEntry(
        theta=theta,
        corners=corners,
        t_theta=hi,
        t_tilde_theta=lo * log_n * log_n,
        n_theta=n_min,
        c_lower=math.sqrt(lo) * alpha**4 * log_n / (alpha + alpha**3 / n_min),
        c_upper=math.sqrt(hi) / alpha,
    )


def merge_entry(calibration: Calibration, entry: CalibrationEntry) -> Calibration:
    kept = [
        e for e in calibration.entries
        if not (e.corners == entry.corners and abs(e.theta - entry.theta) < 1e-12)
    ]
    return calibration.model_copy(update={"entries": sorted(kept + [entry], key=lambda e: (e.corners, e.theta))})


@router.command(
    "calibrate",
    CalibrateConfig,
    summary="Эмпирическая калибровка допустимых времён для угла theta",
    flags=("theta", "n_values"),
)
def cmd_calibrate(config: CalibrateConfig, context: RunContext) -> None:
    """
    1) Для tau на геометрической сетке и каждого n - сканирование при t = tau / n^2.
    2) tau проходит, если все окна всех n внутри полосы.
    3) Запись калибровки по крайним прошедшим tau в calibration.yaml.
    """
    poly = polyline_from_config(config.theta, config.N)
    taus = np.geomspace(config.tau_min, config.tau_max, config.tau_points).tolist()
    jobs = [(poly, n, 1, False, tau / (n * n)) for tau in taus for n in config.n_values]
    results = run_jobs(scan_single_n, jobs, settings.workers)

    grid = []
    passing = []
    for k, tau in enumerate(taus):
        chunk = results[k * len(config.n_values):(k + 1) * len(config.n_values)]
        flags = {
            str(point.n): point.error is None and bool(entries) and all(e.passed for e in entries)
            for point, entries, _ in chunk
        }
        grid.append({"tau": tau, "pass_flags": flags})
        if all(flags.values()):
            passing.append(tau)
    context.produced(write_json(context.out_dir / "calibration_report.json", {"theta": config.theta, "grid": grid}))

    if not passing:
        raise AdmissibilityError(FAIL_ADMISSIBLE_EMPTY, required_n=None, theta=config.theta)
    entry = entry_from_passing(config.theta, 2 * config.N, passing, config.n_values)
    path = save_calibration(merge_entry(read_calibration(), entry))
    logger.info(f"calibrated theta={config.theta:.4f}: tau in [{min(passing):.3e}, {max(passing):.3e}]")
    context.passed = True
    context.summary = {"entry": entry.model_dump(), "calibration_path": str(path)}
