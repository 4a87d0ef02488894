from loguru import logger

from src.cli.dependencies import polyline_from_config
from src.cli.router import CommandRouter
from src.core import settings
from src.core.events import RunContext
from src.schemas.run import GrowthScanConfig
from src.schemas.spectrum import GrowthReport
from src.services.spectral import scan_with_spectra
from src.utils.io import write_csv, write_json

router = CommandRouter()

SPECTRUM_HEADER = [
    "xi", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z", "abs", "window_m", "window_sign",
]


def report_payload(report: GrowthReport) -> dict:
    payload = report.model_dump(mode="json", by_alias=True)
    payload["pass_flags"] = {str(n): flag for n, flag in report.pass_flags.items()}
    payload["all_passed"] = report.all_passed
    return payload


@router.command(
    "growth-scan",
    GrowthScanConfig,
    summary="Рост T_x^ в резонансных окнах по сетке n",
    flags=("theta", "n_values", "snap_8pi"),
)
def cmd_growth_scan(config: GrowthScanConfig, context: RunContext) -> None:
    """
    1) Для каждого m - сканирование по n (задания по n идут в пул процессов).
    2) growth_report.json (growth_report_m<m>.json при нескольких m) и spectrum CSV на каждое n.
    3) Сбой отдельного n пишется в отчёт и делает его флаг ложным.
    """
    poly = polyline_from_config(config.theta, config.N, config.single_corner)
    passed = True
    for m in config.m_values:
        report, spectra = scan_with_spectra(
            poly,
            config.n_values,
            m,
            config.snap_8pi,
            settings.workers,
            config.offwindow_samples,
            config.seed,
        )
        suffix = "" if len(config.m_values) == 1 else f"_m{m}"
        context.produced(write_json(context.out_dir / f"growth_report{suffix}.json", report_payload(report)))
        for n, spectrum in spectra.items():
            path = context.out_dir / f"spectrum{suffix}_n{n}.csv"
            context.produced(write_csv(path, SPECTRUM_HEADER, spectrum.csv_rows()))

        slope_ok = report.slope_fit is None or report.slope_fit.within_tolerance
        trends_ok = all(flag is not False for flag in report.trend_flags.values())
        passed = passed and report.all_passed and slope_ok and trends_ok
        context.summary[f"m{m}"] = {
            "V_modulus": report.V_modulus,
            "degenerate": report.degenerate,
            "pass_flags": {str(n): f for n, f in report.pass_flags.items()},
            "slope": report.slope_fit.slope if report.slope_fit else None,
            "trend_flags": report.trend_flags,
        }
        logger.info(
            f"growth scan m={m}: all passed={report.all_passed}, slope ok={slope_ok}, trends={report.trend_flags}"
        )
    context.passed = passed
