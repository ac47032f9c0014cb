"""Monte Carlo command."""

from nematic_mf.cli.commands.mc.views import router

__all__ = ["router"]
