from nematic_mf.cli.commands.laplace_check.schema import LaplaceCheckResponse, PartitionCheck
from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.routing import CommandRouter
from nematic_mf.solvers.laplace import (
    cumulant_decay_check,
    expansion_rate_check,
    laplace_partition,
    local_data,
    named_function,
    tilted_partition,
)

router = CommandRouter()

RATE_BETAS = (25.0, 100.0, 400.0)
CUMULANT_BETAS = (50.0, 100.0, 200.0, 400.0)
# (exponent, observable)
RATE_CASES = (("ms", "sin2"), ("ms", "sin"), ("cubic", "theta"))
# (g, h, exponent)
CUMULANT_CASES = (("cos", "cos", "ms"), ("theta", "sin2", "ms"), ("sin", "sin", "ms"))


def _partition_check(f_name: str, beta: float) -> PartitionCheck:
    f = named_function(f_name)
    expansion = laplace_partition(local_data(f), beta)
    numeric = tilted_partition(f, beta)
    return PartitionCheck(
        f=f_name,
        beta=beta,
        expansion=expansion,
        numeric=numeric,
        relative_error=abs(expansion - numeric) / abs(numeric),
    )


@router.command(
    "laplace-check",
    help="compare the large-beta expansions with quadrature on named test functions",
)
def check_laplace(context: RunContext) -> LaplaceCheckResponse:
    """
    Runs the partition, rate and cumulant checks.

    :param context: current run.
    :returns: diagnostics.
    """
    return LaplaceCheckResponse(
        partition_checks=[_partition_check("ms", 100.0), _partition_check("cubic", 100.0)],
        rate_checks=[
            expansion_rate_check(named_function(f), named_function(g), RATE_BETAS)
            for f, g in RATE_CASES
        ],
        cumulant_checks=[
            cumulant_decay_check(
                named_function(g),
                named_function(h),
                named_function(f),
                CUMULANT_BETAS,
            )
            for g, h, f in CUMULANT_CASES
        ],
    )
