"""Error hierarchy shared by solvers and the command line."""


class NematicError(Exception):
    """Base class for all errors raised by nematic_mf."""

    exit_code = 1


class InvalidArgumentError(NematicError, ValueError):
    """A precondition on an argument is violated."""

    exit_code = 2


class NumericalDomainError(NematicError, ArithmeticError):
    """An integrand or intermediate value is not finite."""

    exit_code = 3


class ConfigError(NematicError):
    """The run configuration is invalid or inconsistent."""

    exit_code = 2


class InvariantViolationError(NematicError):
    """A numerical invariant failed on computed output."""

    exit_code = 3


class SolverError(NematicError, RuntimeError):
    """A solve that is required to succeed lost its root."""

    exit_code = 3
