from nematic_mf.cli.commands.spectrum.schema import SpectrumResponse
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.solvers.numerics import gauss_rule
from nematic_mf.solvers.potential import potential_from_spec
from nematic_mf.solvers.spectrum import k_eigenvalues

router = CommandRouter()


@router.command(
    "spectrum",
    help="eigenvalues of the linearized operator and bifurcation temperatures",
)
def show_spectrum(context: RunContext) -> SpectrumResponse:
    """
    Computes the spectrum of K for the configured potential.

    :param context: current run.
    :returns: spectrum report.
    """
    U = potential_from_spec(context.config.potential)
    report = k_eigenvalues(U, gauss_rule(context.config.quad_order))
    return SpectrumResponse(potential=U.label, **report.model_dump())
