from src.cli.commands import calibrate, compare, direct_sim, growth_scan, selfsimilar, xi
from src.cli.router import CommandRouter

cli_router = CommandRouter()
cli_router.include_router(selfsimilar.router)
cli_router.include_router(growth_scan.router)
cli_router.include_router(direct_sim.router)
cli_router.include_router(xi.router)
cli_router.include_router(compare.router)
cli_router.include_router(calibrate.router)
