from typing import Optional

from nematic_mf.cli.output import CommandResult
from nematic_mf.solvers.thermo import RankedState


class FreeEnergyResponse(CommandResult):
    """Solutions at one beta ranked by free energy."""

    beta: float
    w: float
    states: list[RankedState]
    transition_beta: Optional[float] = None
