from src.cli.dependencies import polyline_from_config
from src.cli.router import CommandRouter
from src.core.events import RunContext
from src.schemas.run import XiConfig
from src.services import ansatz
from src.services.spectral import xi_report
from src.utils.io import write_json

router = CommandRouter()


@router.command(
    "xi",
    XiConfig,
    summary="Плотность энергии Xi против 4 pi M",
    flags=("theta", "n"),
)
def cmd_xi(config: XiConfig, context: RunContext) -> None:
    poly = polyline_from_config(config.theta, config.N, config.single_corner)
    field = ansatz.make_field(poly.corners)
    reports = [xi_report(field, t, n=config.n) for t in config.t_values]
    passed = all(r.within_tolerance for r in reports)
    context.produced(
        write_json(
            context.out_dir / "xi_report.json",
            {"mass": field.mass, "reports": reports, "passed": passed},
        )
    )
    context.passed = passed
    context.summary = {str(r.t): r.rel_err for r in reports}
