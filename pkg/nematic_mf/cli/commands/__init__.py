"""Subcommands, one package per command."""
