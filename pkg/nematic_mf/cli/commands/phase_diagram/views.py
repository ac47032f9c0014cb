from nematic_mf.cli.commands.phase_diagram.schema import PhaseDiagramResponse
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.services.pool.dependency import get_map
from nematic_mf.solvers.continuation import trace_branches
from nematic_mf.solvers.numerics import graded_rule
from nematic_mf.solvers.sce import ScalarReduction

router = CommandRouter()


@router.command(
    "phase-diagram",
    help="trace branches of the scalar Maier-Saupe equation over a beta range",
    options=("beta_min", "beta_max", "beta_steps", "scan_points"),
)
def trace_phase_diagram(context: RunContext) -> PhaseDiagramResponse:
    """
    Traces all branches and refines their bifurcations.

    Grid scans go through the worker pool.

    :param context: current run.
    :raises InvariantViolationError: if a branch point misses the residual bound.
    :returns: branch rows and events.
    """
    config = context.config
    reduction = ScalarReduction(
        graded_rule(config.quad_order, config.quad_levels),
        w=config.maier_saupe_w(),
        scan_points=config.scan_points,
    )
    diagram = trace_branches(
        config.beta_min,
        config.beta_max,
        config.beta_steps,
        tol=config.tol,
        reduction=reduction,
        map_fn=get_map(context.state),
    )
    diagram.check_residuals()
    return PhaseDiagramResponse.from_diagram(diagram)
