from nematic_mf.cli.commands.solve.schema import SolveResponse
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.solvers.numerics import gauss_rule
from nematic_mf.solvers.potential import effective_potential, potential_from_spec
from nematic_mf.solvers.sce import OrientationDensity, solve_density

router = CommandRouter()

SEEDS = {
    "uniform": OrientationDensity.uniform,
    "prolate": OrientationDensity.prolate,
    "oblate": OrientationDensity.oblate,
}


@router.command(
    "solve",
    help="solve the self-consistency equation for the density by damped iteration",
    options=("beta", "damping", "seed_density"),
)
def solve(context: RunContext) -> SolveResponse:
    """
    Iterates from the configured seed density.

    Non-convergence is reported in the response, not raised.

    :param context: current run.
    :returns: solution summary with the density at the nodes.
    """
    config = context.config
    beta = config.require_beta()
    U = potential_from_spec(config.potential)
    rule = gauss_rule(config.quad_order)
    result = solve_density(
        beta,
        U,
        SEEDS[config.seed_density](rule),
        damping=config.damping,
        tol=config.tol,
        max_iter=config.max_iter,
    )
    moments = effective_potential(U, result.density).legendre_moments
    return SolveResponse(
        beta=beta,
        seed_density=config.seed_density,
        order_parameter=result.order_parameter,
        residual=result.residual,
        iterations=result.iterations,
        converged=result.converged,
        legendre_moments=dict(moments),
        nodes=rule.nodes.tolist(),
        density=result.density.values.tolist(),
    )
