from nematic_mf.cli.output import CommandResult
from nematic_mf.solvers.spectrum import SpectrumReport


class SpectrumResponse(SpectrumReport, CommandResult):
    """Spectrum report of one potential."""

    potential: str
