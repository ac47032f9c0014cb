from nematic_mf.cli.commands.mc.schema import McResponse
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.services.pool.dependency import get_map
from nematic_mf.solvers.mc import merge_estimates, run_chains
from nematic_mf.solvers.potential import potential_from_spec

router = CommandRouter()


@router.command(
    "mc",
    help="Metropolis estimate of the order parameter for N rods",
    options=("beta", "n_particles", "sweeps", "burnin", "chains"),
)
def sample_order_parameter(context: RunContext) -> McResponse:
    """
    Runs independent chains through the worker pool and merges them.

    :param context: current run.
    :returns: merged estimate.
    """
    config = context.config
    estimates = run_chains(
        config.n_particles,
        config.require_beta(),
        potential_from_spec(config.potential),
        config.sweeps,
        config.burnin,
        config.seed,
        chains=config.chains,
        map_fn=get_map(context.state),
    )
    merged = merge_estimates(estimates)
    return McResponse(
        n_particles=merged.n_particles,
        beta=merged.beta,
        xi_mean=merged.mean,
        xi_stderr=merged.std_error,
        tau_int=merged.integrated_autocorrelation_time,
        acceptance=merged.acceptance_rate,
        chains=estimates,
        warnings=merged.warnings,
    )
