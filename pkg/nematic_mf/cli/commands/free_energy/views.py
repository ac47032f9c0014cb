from nematic_mf.cli.commands.free_energy.schema import FreeEnergyResponse
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.solvers.numerics import graded_rule
from nematic_mf.solvers.sce import ScalarReduction
from nematic_mf.solvers.thermo import scalar_states, transition_beta

router = CommandRouter()

# Bracket of the first-order transition in units of 1 / w.
TRANSITION_BRACKET = (4.5, 5.0)


@router.command(
    "free-energy",
    help="rank the Maier-Saupe solutions at one beta by free energy",
    options=("beta", "scan_points"),
)
def rank_free_energies(context: RunContext) -> FreeEnergyResponse:
    """
    Ranks every scalar solution and locates the first-order transition.

    :param context: current run.
    :returns: ranked states.
    """
    config = context.config
    beta = config.require_beta()
    w = config.maier_saupe_w()
    reduction = ScalarReduction(
        graded_rule(config.quad_order, config.quad_levels),
        w=w,
        scan_points=config.scan_points,
    )
    lo, hi = TRANSITION_BRACKET
    return FreeEnergyResponse(
        beta=beta,
        w=w,
        states=scalar_states(beta, reduction, tol=config.tol),
        transition_beta=transition_beta(lo / w, hi / w, reduction, tol=config.tol),
    )
