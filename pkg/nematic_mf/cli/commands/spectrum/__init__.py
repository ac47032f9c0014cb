"""Spectrum command."""

from nematic_mf.cli.commands.spectrum.views import router

__all__ = ["router"]
