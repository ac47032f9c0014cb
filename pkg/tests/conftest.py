import json
from typing import Any, Callable, Iterator

import numpy as np
import pytest
from loguru import logger

from nematic_mf.cli.application import main
from nematic_mf.solvers.numerics import QuadratureRule, gauss_rule
from nematic_mf.solvers.potential import AxisymmetricPotential, maier_saupe
from nematic_mf.solvers.sce import ScalarReduction, default_scalar_rule


@pytest.fixture(scope="session")
def gauss64() -> QuadratureRule:
    """
    Default Gauss-Legendre rule.

    :return: 64-node rule on [0, 1].
    """
    return gauss_rule(64)


@pytest.fixture(scope="session")
def ms() -> AxisymmetricPotential:
    """
    Maier-Saupe potential with unit coupling.

    :return: potential.
    """
    return maier_saupe(1.0)


@pytest.fixture(scope="session")
def reduction() -> ScalarReduction:
    """
    Scalar reduction for w = 1 on the graded rule.

    :return: reduction.
    """
    return ScalarReduction(default_scalar_rule())


@pytest.fixture
def rng() -> np.random.Generator:
    """
    Seeded generator, fresh for every test.

    :return: generator.
    """
    return np.random.default_rng(20240917)


@pytest.fixture
def run_cli(capsys: pytest.CaptureFixture[str]) -> Iterator[Callable[..., tuple[int, str]]]:
    """
    Runs the command line in-process.

    Log sinks bound to the captured stderr are dropped afterwards.

    :param capsys: output capture.
    :yield: function taking arguments and returning (exit code, stdout).
    """

    def _run(*argv: str) -> tuple[int, str]:
        capsys.readouterr()
        code = main(list(argv))
        return code, capsys.readouterr().out

    yield _run
    logger.remove()


@pytest.fixture
def run_cli_json(run_cli: Callable[..., tuple[int, str]]) -> Callable[..., Any]:
    """
    Runs a command that must succeed and parses its JSON output.

    :param run_cli: command line runner.
    :return: function taking arguments and returning the parsed document.
    """

    def _run(*argv: str) -> Any:
        code, out = run_cli(*argv)
        assert code == 0
        return json.loads(out)

    return _run
