"""Laplace expansion checks command."""

from nematic_mf.cli.commands.laplace_check.views import router

__all__ = ["router"]
