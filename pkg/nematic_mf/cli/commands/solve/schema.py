from nematic_mf.cli.output import CommandResult


class SolveResponse(CommandResult):
    """Outcome of the density iteration."""

    beta: float
    seed_density: str
    order_parameter: float
    residual: float
    iterations: int
    converged: bool
    legendre_moments: dict[int, float]
    nodes: list[float]
    density: list[float]
