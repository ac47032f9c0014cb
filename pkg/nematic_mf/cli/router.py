from nematic_mf.cli.commands import (
    free_energy,
    laplace_check,
    mc,
    phase_diagram,
    solve,
    spectrum,
)
from nematic_mf.cli.routing import CommandRouter

api_router = CommandRouter()
api_router.include_router(spectrum.router)
api_router.include_router(phase_diagram.router)
api_router.include_router(solve.router)
api_router.include_router(laplace_check.router)
api_router.include_router(mc.router)
api_router.include_router(free_energy.router)
