"""Phase diagram command."""

from nematic_mf.cli.commands.phase_diagram.views import router

__all__ = ["router"]
