import math

import numpy as np
import pytest

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.continuation import BranchKind
from nematic_mf.solvers.numerics import QuadratureRule
from nematic_mf.solvers.potential import AxisymmetricPotential, maier_saupe
from nematic_mf.solvers.sce import (
    ISOTROPIC_XI,
    OrientationDensity,
    ScalarReduction,
    ScalarRoot,
    seed_density,
    solve_scalar,
)
from nematic_mf.solvers.thermo import (
    density_from_root,
    first_variation_check,
    free_energy,
    rank_branches,
    root_label,
    scalar_states,
    transition_beta,
)


@pytest.mark.parametrize("w", [0.5, 1.0, 3.0])
def test_uniform_free_energy(w: float, gauss64: QuadratureRule) -> None:
    report = free_energy(2.0, maier_saupe(w), OrientationDensity.uniform(gauss64))
    assert report.energy == pytest.approx(w / 2.0, abs=1e-12)
    assert report.entropy == pytest.approx(math.log(2.0 * math.pi), abs=1e-12)
    assert report.free_energy == pytest.approx(w / 2.0 - math.log(2.0 * math.pi) / 2.0, abs=1e-12)


def test_entropy_is_maximal_at_uniform(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    """
    The entropy deficit of a family of aligned densities grows with their distance from uniform.

    :param ms: Maier-Saupe potential.
    :param gauss64: quadrature rule.
    """
    uniform = OrientationDensity.uniform(gauss64)
    top = free_energy(1.0, ms, uniform).entropy
    for xi in (0.5, 0.6, 0.75):
        nu = seed_density(gauss64, xi)
        deficit = top - free_energy(1.0, ms, nu).entropy
        distance = 2.0 * math.pi * gauss64.integrate((nu.values - uniform.values) ** 2)
        assert deficit > 0.0
        assert deficit >= 0.1 * distance


def test_nematic_wins_at_low_temperature() -> None:
    states = scalar_states(10.0)
    assert [state.rank for state in states] == [0, 1, 2]
    assert states[0].label == "nematic-lower"
    assert {state.label for state in states} == {"isotropic", "nematic-lower", "nematic-upper"}
    energies = [state.report.free_energy for state in states]
    assert energies == sorted(energies)
    assert not any(state.degenerate for state in states)


def test_isotropic_alone_at_high_temperature() -> None:
    states = scalar_states(1.0)
    assert len(states) == 1
    assert states[0].label == "isotropic"


def test_isotropic_wins_between_saddle_node_and_transition() -> None:
    states = scalar_states(4.52)
    assert len(states) == 3
    assert states[0].label == "isotropic"


def test_transition_temperature(reduction: ScalarReduction) -> None:
    beta = transition_beta(4.5, 5.0, reduction)
    assert beta == pytest.approx(4.5415, abs=1e-3)
    assert 4.4875 < beta < 5.0


def test_transition_needs_crossing(reduction: ScalarReduction) -> None:
    with pytest.raises(InvalidArgumentError):
        transition_beta(6.0, 8.0, reduction)


def test_solutions_are_critical_points(
    ms: AxisymmetricPotential,
    gauss64: QuadratureRule,
    rng: np.random.Generator,
) -> None:
    uniform = OrientationDensity.uniform(gauss64)
    assert first_variation_check(3.0, ms, uniform, rng) <= 10.0
    lower = next(root for root in solve_scalar(10.0, rule=gauss64) if root.stable)
    nematic = density_from_root(10.0, ms, lower.xi, gauss64)
    assert first_variation_check(10.0, ms, nematic, rng) <= 10.0


def test_non_solution_fails_first_variation(
    ms: AxisymmetricPotential,
    gauss64: QuadratureRule,
    rng: np.random.Generator,
) -> None:
    prolate = OrientationDensity.prolate(gauss64)
    assert first_variation_check(3.0, ms, prolate, rng) > 10.0


def test_rank_flags_degenerate_states(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    uniform = OrientationDensity.uniform(gauss64)
    ranked = rank_branches(2.0, ms, [("a", uniform), ("b", uniform)])
    assert all(state.degenerate for state in ranked)


def test_rank_rejects_non_solution(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    with pytest.raises(InvalidArgumentError):
        rank_branches(3.0, ms, [("prolate", OrientationDensity.prolate(gauss64))])


def test_free_energy_needs_positive_beta(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    with pytest.raises(InvalidArgumentError):
        free_energy(0.0, ms, OrientationDensity.uniform(gauss64))


def test_root_label_tolerates_rounding_at_the_isotropic_root() -> None:
    def root(xi: float, stable: bool) -> ScalarRoot:
        return ScalarRoot(xi=xi, dF_dxi=0.5, stable=stable, oblate=xi > ISOTROPIC_XI + 1e-7, residual=0.0)

    assert root_label(root(ISOTROPIC_XI, True)) is BranchKind.ISOTROPIC
    assert root_label(root(ISOTROPIC_XI + 1e-12, False)) is BranchKind.ISOTROPIC
    assert root_label(root(ISOTROPIC_XI - 1e-12, True)) is BranchKind.ISOTROPIC
    assert root_label(root(0.3, True)) is BranchKind.NEMATIC_LOWER
    assert root_label(root(0.6, False)) is BranchKind.NEMATIC_UPPER
    assert root_label(root(0.9, False)) is BranchKind.NEMATIC_UPPER
    assert [root_label(found) for found in solve_scalar(10.0)] == [
        BranchKind.NEMATIC_LOWER,
        BranchKind.ISOTROPIC,
        BranchKind.NEMATIC_UPPER,
    ]
