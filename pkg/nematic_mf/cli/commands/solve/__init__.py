"""Density solve command."""

from nematic_mf.cli.commands.solve.views import router

__all__ = ["router"]
