from src.cli.dependencies import polyline_from_config
from src.cli.router import CommandRouter
from src.core.events import RunContext
from src.schemas.frame import SpaceGrid
from src.schemas.run import DirectSimConfig
from src.services import direct_sim
from src.utils.io import write_csv, write_json

router = CommandRouter()


@router.command(
    "direct-sim",
    DirectSimConfig,
    summary="Прямое интегрирование T_t = T x T_xx от сглаженной ломаной",
    flags=("theta",),
)
def cmd_direct_sim(config: DirectSimConfig, context: RunContext) -> None:
    poly = polyline_from_config(config.theta, config.N, config.single_corner)
    grid = SpaceGrid(x_min=-config.L, x_max=config.L, dx=config.h)
    field = direct_sim.init_from_polyline(poly, grid, config.mollify_eps)
    result = direct_sim.run(field, config.t_final, config.dt, config.snapshots)

    snapshot_times = []
    for k, snapshot in enumerate(result.snapshots):
        path = context.out_dir / f"snapshot_{k:03d}.csv"
        context.produced(write_csv(path, ["x", "Tx", "Ty", "Tz"], snapshot.csv_rows()))
        snapshot_times.append(snapshot.t)
    context.produced(
        write_csv(context.out_dir / "final.csv", ["x", "Tx", "Ty", "Tz"], result.final.csv_rows())
    )

    payload = result.manifest_dict() | {"mollify_eps": config.mollify_eps, "snapshot_times": snapshot_times}
    context.produced(write_json(context.out_dir / "direct_sim.json", payload))
    context.summary = {"steps": result.steps, "energy_drift": result.energy_drift}
