from contextlib import contextmanager
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Iterator

from loguru import logger

from nematic_mf.cli.config import RunConfig
from nematic_mf.log import configure_logging
from nematic_mf.services.pool.lifespan import init_pool, shutdown_pool


@dataclass
class RunContext:
    """Everything a command handler needs."""

    config: RunConfig
    command: str
    run_id: str
    state: SimpleNamespace = field(default_factory=SimpleNamespace)


@contextmanager
def lifespan_setup(context: RunContext) -> Iterator[None]:  # pragma: no cover
    """
    Actions to run around a command.

    Configures logging, binds the command and run id to
    every record and stores the worker pool in the state.

    :param context: the run context.
    :yields: nothing.
    """
    configure_logging(context.config.log_level)
    init_pool(context.state, context.config.jobs)
    try:
        with logger.contextualize(command=context.command, run_id=context.run_id):
            yield
    finally:
        shutdown_pool(context.state)
