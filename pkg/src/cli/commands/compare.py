from src.cli.dependencies import polyline_from_config
from src.cli.router import CommandRouter
from src.core.events import RunContext
from src.schemas.run import CompareConfig
from src.services.direct_sim import mollification_sweep
from src.utils.io import write_json

router = CommandRouter()


@router.command(
    "compare",
    CompareConfig,
    summary="Прямое решение против поля Хасимото при уменьшении сглаживания",
    flags=("theta",),
)
def cmd_compare(config: CompareConfig, context: RunContext) -> None:
    """passed - sup-расстояние строго убывает вдоль eps_values."""
    poly = polyline_from_config(config.theta, config.N, config.single_corner)
    metrics = mollification_sweep(
        poly,
        config.t,
        config.eps_values,
        config.L,
        config.h,
    )
    sups = [m.sup for m in metrics]
    monotone = all(b < a for a, b in zip(sups, sups[1:]))
    context.produced(
        write_json(context.out_dir / "compare.json", {"metrics": metrics, "monotone": monotone})
    )
    context.passed = monotone
    context.summary = {"sup": sups}
