from loguru import logger

from src.cli.router import CommandRouter
from src.core import settings
from src.core.events import RunContext
from src.schemas.run import SelfSimilarConfig
from src.services.selfsimilar import angle_law_entry, cached_profile
from src.utils.init_calibration import load_calibration
from src.utils.io import format_float, write_csv, write_json
from src.utils.parallel import run_jobs

router = CommandRouter()


@router.command(
    "selfsimilar",
    SelfSimilarConfig,
    summary="Закон угла для списка alpha и профили G, T",
)
def cmd_selfsimilar(config: SelfSimilarConfig, context: RunContext) -> None:
    """
    1) Для каждого alpha - измеренный угол против 2 arcsin(e^{-pi alpha^2/2}).
    2) angle_law.json и profile_alpha_<alpha>.csv (y, G, T).
    """
    jobs = [(alpha, config.y_max, config.dy) for alpha in config.alphas]
    entries = run_jobs(angle_law_entry, jobs, settings.workers)
    tolerance = load_calibration().tolerances.angle_abs
    passed = all(e.abs_err <= tolerance for e in entries)

    context.produced(
        write_json(
            context.out_dir / "angle_law.json",
            {"entries": entries, "tolerance": tolerance, "passed": passed},
        )
    )
    if config.profile_csv:
        for alpha in config.alphas:
            traj = cached_profile(alpha, config.y_max, config.dy)
            path = context.out_dir / f"profile_alpha_{format_float(alpha)}.csv"
            context.produced(
                write_csv(path, ["y", "Gx", "Gy", "Gz", "Tx", "Ty", "Tz"], traj.csv_rows())
            )

    for e in entries:
        logger.info(f"alpha={e.alpha}: theta={e.theta_measured:.6f}, law={e.theta_law:.6f}, err={e.abs_err:.2e}")
    context.passed = passed
    context.summary = {"alphas": len(entries), "max_abs_err": max((e.abs_err for e in entries), default=0.0)}
