"""Free energy command."""

from nematic_mf.cli.commands.free_energy.views import router

__all__ = ["router"]
