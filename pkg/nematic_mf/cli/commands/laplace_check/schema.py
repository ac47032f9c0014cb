from pydantic import BaseModel

from nematic_mf.cli.output import CommandResult
from nematic_mf.solvers.laplace import CumulantDiagnostics, RateDiagnostics


class PartitionCheck(BaseModel):
    """Partition expansion against quadrature at one beta."""

    f: str
    beta: float
    expansion: float
    numeric: float
    relative_error: float


class LaplaceCheckResponse(CommandResult):
    """Diagnostics of the large-beta expansions."""

    partition_checks: list[PartitionCheck]
    rate_checks: list[RateDiagnostics]
    cumulant_checks: list[CumulantDiagnostics]
