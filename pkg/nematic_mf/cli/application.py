import argparse
import uuid
from importlib import metadata
from pathlib import Path
from typing import Any, Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from nematic_mf.cli.config import resolve_config
from nematic_mf.cli.lifespan import RunContext, lifespan_setup
from nematic_mf.cli.router import api_router
from nematic_mf.exceptions import NematicError
from nematic_mf.log import configure_logging
from nematic_mf.settings import LogLevel, settings

EXIT_OK = 0
EXIT_CONFIG = 2

# Flags shared by every command.
COMMON_OPTIONS = (
    "potential",
    "w",
    "coeffs",
    "quad_order",
    "tol",
    "seed",
    "jobs",
    "out",
    "config",
    "emit_config",
    "log_level",
)

FLAGS: dict[str, dict[str, Any]] = {
    "potential": {"choices": ["maier-saupe", "legendre"], "help": "pair potential family"},
    "w": {"type": float, "help": "Maier-Saupe coupling, > 0"},
    "coeffs": {"help": "Legendre coefficients as degree:value pairs, e.g. 0:1,2:-1"},
    "quad_order": {"type": int, "help": "Gauss-Legendre nodes (per panel when graded)"},
    "tol": {"type": float, "help": "solver tolerance"},
    "seed": {"type": int, "help": "random seed"},
    "jobs": {"type": int, "help": "worker processes, 1 runs in-process"},
    "out": {"type": Path, "help": "output file (directory for phase-diagram)"},
    "config": {"type": Path, "help": "JSON run configuration to start from"},
    "emit_config": {"action": "store_true", "help": "print the resolved configuration and exit"},
    "log_level": {"choices": [level.value for level in LogLevel], "help": "log level"},
    "beta": {"type": float, "help": "inverse temperature"},
    "beta_min": {"type": float, "help": "first grid inverse temperature"},
    "beta_max": {"type": float, "help": "last grid inverse temperature"},
    "beta_steps": {"type": int, "help": "grid points"},
    "scan_points": {"type": int, "help": "root isolation scan size"},
    "damping": {"type": float, "help": "relaxation weight in (0, 1]"},
    "seed_density": {"choices": ["uniform", "prolate", "oblate"], "help": "initial density"},
    "n_particles": {"type": int, "help": "number of rods"},
    "sweeps": {"type": int, "help": "total sweeps including burn-in"},
    "burnin": {"type": int, "help": "burn-in sweeps"},
    "chains": {"type": int, "help": "independent chains"},
}


def _add_flag(parser: argparse.ArgumentParser, name: str) -> None:
    options = dict(FLAGS[name])
    if options.get("action") != "store_true":
        options.setdefault("default", None)
    parser.add_argument(f"--{name.replace('_', '-')}", dest=name, **options)


def _version() -> str:
    try:
        return metadata.version("nematic_mf")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


def get_app() -> argparse.ArgumentParser:
    """
    Get the command-line parser.

    This is the main constructor of the application:
    one subparser per registered command.

    :return: parser.
    """
    parser = argparse.ArgumentParser(
        prog="nematic-mf",
        description="Mean-field nematic self-consistency solver.",
    )
    parser.add_argument("--version", action="version", version=_version())
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in api_router.commands.values():
        subparser = subparsers.add_parser(command.name, help=command.help)
        for name in (*COMMON_OPTIONS, *command.options):
            _add_flag(subparser, name)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command and map errors to exit codes.

    0 on success, 2 for configuration errors, 3 for numerical
    invariant violations.

    :param argv: arguments, sys.argv when None.
    :return: exit code.
    """
    args = get_app().parse_args(argv)
    configure_logging(LogLevel(args.log_level) if args.log_level else settings.log_level)
    command = api_router.commands[args.command]
    try:
        config = resolve_config(args)
        if args.emit_config:
            print(config.model_dump_json(indent=2))  # noqa: T201
            return EXIT_OK
        context = RunContext(config=config, command=command.name, run_id=uuid.uuid4().hex[:12])
        with lifespan_setup(context):
            logger.info("running {}", command.name)
            command.handler(context).write(config.out)
    except ValidationError as exc:
        logger.error("invalid configuration: {}", exc)
        return EXIT_CONFIG
    except NematicError as exc:
        logger.error("{}: {}", type(exc).__name__, exc)
        return exc.exit_code
    return EXIT_OK
