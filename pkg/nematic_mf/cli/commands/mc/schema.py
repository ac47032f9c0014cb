from pydantic import Field

from nematic_mf.cli.output import CommandResult
from nematic_mf.solvers.mc import McEstimate


class McResponse(CommandResult):
    """Merged Monte Carlo estimate with the per-chain results."""

    n_particles: int = Field(serialization_alias="N")
    beta: float
    xi_mean: float
    xi_stderr: float
    tau_int: float
    acceptance: float
    chains: list[McEstimate]
    warnings: list[str] = []
