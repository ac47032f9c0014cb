"""Command registration in the style of an API router."""

from dataclasses import dataclass, field
from typing import Callable, Optional

from nematic_mf.cli.lifespan import RunContext
from nematic_mf.cli.output import CommandResult

Handler = Callable[[RunContext], CommandResult]


@dataclass(frozen=True)
class Command:
    """A registered subcommand."""

    name: str
    handler: Handler
    help: str
    options: tuple[str, ...] = ()


@dataclass
class CommandRouter:
    """Collects subcommands; routers can be nested with include_router."""

    commands: dict[str, Command] = field(default_factory=dict)

    def command(
        self,
        name: str,
        help: str,  # noqa: A002
        options: tuple[str, ...] = (),
    ) -> Callable[[Handler], Handler]:
        """
        Registers a handler under a subcommand name.

        :param name: subcommand as typed on the command line.
        :param help: one-line description.
        :param options: command-specific flags, by field name.
        :returns: decorator leaving the handler unchanged.
        """

        def decorator(handler: Handler) -> Handler:
            self.commands[name] = Command(name=name, handler=handler, help=help, options=options)
            return handler

        return decorator

    def include_router(self, router: "CommandRouter") -> None:
        """
        Adds every command of another router.

        :param router: router to merge.
        """
        for name, command in router.commands.items():
            if name in self.commands:
                raise ValueError(f"command {name!r} registered twice")
            self.commands[name] = command

    def get(self, name: str) -> Optional[Command]:
        """Command registered under name."""
        return self.commands.get(name)
