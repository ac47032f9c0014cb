import math

import numpy as np
import pytest

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.numerics import QuadratureRule, gauss_rule
from nematic_mf.solvers.potential import AxisymmetricPotential, maier_saupe
from nematic_mf.solvers.sce import (
    ISOTROPIC_XI,
    OrientationDensity,
    ScalarReduction,
    f_scalar,
    f_scalar_exact,
    order_parameter,
    sce_map,
    sce_residual,
    seed_density,
    solve_density,
    solve_scalar,
)


@pytest.mark.parametrize("beta", [0.0, 1.0, 5.0, 50.0, 500.0])
def test_uniform_is_fixed(beta: float, ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    uniform = OrientationDensity.uniform(gauss64)
    image = sce_map(beta, ms, uniform)
    assert np.max(np.abs(image.values - uniform.values)) <= 1e-12
    assert sce_residual(beta, ms, uniform) <= 1e-12


@pytest.mark.parametrize("beta", [1e-4, 1e-3])
def test_high_temperature_limit(beta: float, ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    """
    The image of any density approaches the uniform one linearly in beta.

    :param beta: small inverse temperature.
    :param ms: Maier-Saupe potential.
    :param gauss64: quadrature rule.
    """
    uniform = OrientationDensity.uniform(gauss64)
    for nu in (OrientationDensity.prolate(gauss64), OrientationDensity.oblate(gauss64)):
        image = sce_map(beta, ms, nu)
        assert np.max(np.abs(image.values - uniform.values)) <= 0.5 * beta


def test_map_preserves_densities(
    ms: AxisymmetricPotential,
    gauss64: QuadratureRule,
    rng: np.random.Generator,
) -> None:
    for _ in range(100):
        beta = float(rng.uniform(0.0, 500.0))
        nu = OrientationDensity.from_values(gauss64, rng.random(gauss64.order) + 0.01)
        image = sce_map(beta, ms, nu)
        assert np.all(image.values >= 0.0)
        mass = 2.0 * math.pi * gauss64.integrate(image.values)
        assert abs(mass - 1.0) <= 1e-12


def test_order_parameter_limits(gauss64: QuadratureRule) -> None:
    assert math.isclose(order_parameter(OrientationDensity.uniform(gauss64)), ISOTROPIC_XI, abs_tol=1e-14)
    polar = np.zeros(gauss64.order)
    polar[-1] = 1.0
    assert order_parameter(OrientationDensity.from_values(gauss64, polar)) < 1e-3
    equatorial = np.zeros(gauss64.order)
    equatorial[0] = 1.0
    assert order_parameter(OrientationDensity.from_values(gauss64, equatorial)) > 0.999


def test_density_validation(gauss64: QuadratureRule) -> None:
    with pytest.raises(InvalidArgumentError):
        OrientationDensity(values=np.ones(gauss64.order), rule=gauss64)
    with pytest.raises(InvalidArgumentError):
        OrientationDensity.from_values(gauss64, -np.ones(gauss64.order))
    with pytest.raises(InvalidArgumentError):
        OrientationDensity(values=np.ones(3), rule=gauss64)


@pytest.mark.parametrize("beta", [0.1, 5.0, 100.0])
def test_scalar_isotropic_root(beta: float, reduction: ScalarReduction) -> None:
    assert math.isclose(reduction.f(beta, ISOTROPIC_XI), ISOTROPIC_XI, abs_tol=1e-14)


def test_scalar_limits(reduction: ScalarReduction) -> None:
    assert abs(reduction.f(1e-8, 0.1) - ISOTROPIC_XI) <= 1e-7
    assert math.isclose(reduction.f(100.0, 0.0), 1.0 / 150.0, rel_tol=1e-2)
    values = reduction.f(37.0, np.linspace(0.0, 1.0, 11))
    assert np.all((values > 0.0) & (values < 1.0))


def test_scalar_range_up_to_low_temperature(reduction: ScalarReduction) -> None:
    xis = np.linspace(0.0, 1.0, 201)
    for beta in np.geomspace(1e-3, 500.0, 40):
        values = np.asarray(reduction.f(float(beta), xis))
        assert np.all(np.isfinite(values))
        assert np.all((values > 0.0) & (values < 1.0))


@pytest.mark.parametrize("beta", [100.0, 500.0])
def test_map_survives_low_temperature(beta: float, ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    for seed in (OrientationDensity.prolate(gauss64, 20.0), OrientationDensity.oblate(gauss64, 20.0)):
        image = sce_map(beta, ms, seed)
        assert np.all(np.isfinite(image.values))
        assert np.all(image.values >= 0.0)
        assert math.isclose(2.0 * math.pi * gauss64.integrate(image.values), 1.0, abs_tol=1e-12)


def test_scalar_matches_closed_form(reduction: ScalarReduction) -> None:
    for beta in (0.05, 0.5, 2.0, 10.0, 80.0, 500.0):
        for xi in (0.0, 0.05, 0.3, 2.0 / 3.0 - 1e-4, 0.7, 0.95, 1.0):
            assert math.isclose(reduction.f(beta, xi), f_scalar_exact(beta, xi), rel_tol=1e-12, abs_tol=1e-14)


def test_f_scalar_function_vectorized() -> None:
    xis = np.array([0.0, 0.3, 0.7, 1.0])
    values = np.asarray(f_scalar(5.0, xis, w=2.0))
    assert values.shape == xis.shape
    for xi, value in zip(xis, values):
        assert math.isclose(value, f_scalar_exact(10.0, float(xi)), rel_tol=1e-12, abs_tol=1e-14)


def test_scalar_single_root_at_high_temperature() -> None:
    for beta in (0.1, 0.2, 0.3, 1.0):
        roots = solve_scalar(beta)
        assert len(roots) == 1
        assert math.isclose(roots[0].xi, ISOTROPIC_XI, abs_tol=1e-10)
        assert roots[0].stable


def test_scalar_three_roots_at_low_temperature(reduction: ScalarReduction) -> None:
    roots = solve_scalar(10.0)
    assert len(roots) == 3
    lower, iso, upper = roots
    assert lower.stable
    assert lower.xi < ISOTROPIC_XI
    assert not lower.oblate
    assert math.isclose(iso.xi, ISOTROPIC_XI, abs_tol=1e-12)
    assert not iso.stable
    assert upper.oblate
    assert not upper.stable
    for root in roots:
        assert root.residual <= 1e-9

    grid = np.linspace(0.0, 1.0, 5001)
    values = np.asarray(reduction.g(10.0, grid))
    changes = grid[np.flatnonzero(values[:-1] * values[1:] < 0.0)]
    assert len(changes) == 3
    for change, root in zip(changes, roots):
        assert abs(change - root.xi) <= 2.0 / 5000


def test_isotropic_slope_at_bifurcation(reduction: ScalarReduction) -> None:
    assert math.isclose(reduction.df_dxi(5.0, ISOTROPIC_XI), 1.0, abs_tol=1e-3)
    assert math.isclose(reduction.df_dxi(2.5, ISOTROPIC_XI), 0.5, abs_tol=1e-3)


def test_scalar_depends_on_beta_times_w() -> None:
    narrow = ScalarReduction(gauss_rule(64), w=2.0)
    wide = ScalarReduction(gauss_rule(64), w=1.0)
    for xi in (0.1, 0.5, 0.9):
        assert math.isclose(narrow.f(3.0, xi), wide.f(6.0, xi), rel_tol=1e-14)


def test_density_solver_uniform(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    result = solve_density(3.0, ms, OrientationDensity.uniform(gauss64), tol=1e-13)
    assert result.converged
    assert result.iterations == 0
    assert math.isclose(result.order_parameter, ISOTROPIC_XI, abs_tol=1e-14)


def test_density_solver_full_step_stays_uniform(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    result = solve_density(10.0, ms, OrientationDensity.uniform(gauss64), damping=1.0)
    assert result.converged
    assert math.isclose(result.order_parameter, ISOTROPIC_XI, abs_tol=1e-14)


@pytest.mark.parametrize("beta", [6.0, 10.0, 20.0])
def test_density_matches_scalar_roots(
    beta: float,
    ms: AxisymmetricPotential,
    gauss64: QuadratureRule,
) -> None:
    """
    Seeding the density solver near each stable scalar root converges to it.

    :param beta: inverse temperature.
    :param ms: Maier-Saupe potential.
    :param gauss64: quadrature rule.
    """
    stable = [root for root in solve_scalar(beta, rule=gauss64) if root.stable]
    assert stable
    for root in stable:
        seed = seed_density(gauss64, root.xi + 0.01)
        result = solve_density(beta, ms, seed, tol=1e-12)
        assert result.converged
        assert abs(result.order_parameter - root.xi) <= 1e-8


def test_density_solver_below_bifurcation(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    result = solve_density(3.0, ms, OrientationDensity.prolate(gauss64), tol=1e-12)
    assert result.converged
    assert math.isclose(result.order_parameter, ISOTROPIC_XI, abs_tol=1e-9)


def test_density_solver_reports_non_convergence(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    result = solve_density(10.0, ms, OrientationDensity.prolate(gauss64), max_iter=1)
    assert not result.converged
    assert result.iterations == 1
    assert result.residual > 1e-10


def test_density_solver_validation(ms: AxisymmetricPotential, gauss64: QuadratureRule) -> None:
    uniform = OrientationDensity.uniform(gauss64)
    with pytest.raises(InvalidArgumentError):
        solve_density(1.0, ms, uniform, tol=0.0)
    with pytest.raises(InvalidArgumentError):
        solve_density(1.0, ms, uniform, damping=0.0)
    with pytest.raises(InvalidArgumentError):
        solve_density(-1.0, ms, uniform)


def test_seed_density_hits_target(gauss64: QuadratureRule) -> None:
    for xi in (0.1, 0.4, 2.0 / 3.0, 0.8):
        assert math.isclose(order_parameter(seed_density(gauss64, xi)), xi, abs_tol=1e-12)
    with pytest.raises(InvalidArgumentError):
        seed_density(gauss64, 1.0)


def test_maier_saupe_coupling_scales_density(gauss64: QuadratureRule) -> None:
    nu = OrientationDensity.prolate(gauss64)
    assert np.allclose(
        sce_map(2.0, maier_saupe(3.0), nu).values,
        sce_map(6.0, maier_saupe(1.0), nu).values,
        rtol=1e-12,
    )
