import math
import pickle

import numpy as np
import pytest

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.numerics import QuadratureRule, gauss_rule
from nematic_mf.solvers.potential import (
    AxisymmetricPotential,
    LegendreSpec,
    azimuthal_average,
    check_constant_mean,
    effective_potential,
    legendre_potential,
    maier_saupe,
    potential_from_spec,
    project_kernel,
)
from nematic_mf.solvers.sce import OrientationDensity


def test_maier_saupe_coefficients() -> None:
    U = maier_saupe(2.0)
    assert dict(U.coeffs) == {0: 2.0, 2: -2.0}
    assert U.degrees == (0, 2)
    assert U.coefficient(4) == 0.0
    x = np.linspace(0.0, 1.0, 7)
    assert np.allclose(U.evaluate(x), 3.0 * (1.0 - x**2), atol=1e-14)


@pytest.mark.parametrize("w", [0.0, -1.0, math.inf])
def test_maier_saupe_rejects_bad_coupling(w: float) -> None:
    with pytest.raises(InvalidArgumentError):
        maier_saupe(w)


@pytest.mark.parametrize("coeffs", [{1: 1.0}, {2: math.nan}, {18: 1.0}, {-2: 1.0}])
def test_potential_rejects_bad_coefficients(coeffs: dict[int, float]) -> None:
    with pytest.raises(InvalidArgumentError):
        legendre_potential(coeffs)


def test_sup_norm() -> None:
    assert math.isclose(maier_saupe(1.0).sup_norm(), 1.5, rel_tol=1e-14)
    assert math.isclose(legendre_potential({0: 1.0}).sup_norm(), 1.0)
    quartic = legendre_potential({4: 1.0})
    grid = np.linspace(0.0, 1.0, 100_001)
    assert math.isclose(quartic.sup_norm(), float(np.max(np.abs(quartic.evaluate(grid)))), rel_tol=1e-9)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0, 5.0])
def test_constant_mean_maier_saupe(w: float, gauss64: QuadratureRule) -> None:
    """
    The half-sphere integral of U(m, .) equals 2 pi w at every probe.

    :param w: coupling.
    :param gauss64: quadrature rule.
    """
    check = check_constant_mean(maier_saupe(w), gauss64)
    assert check.constant
    assert check.deviation <= 1e-12 * max(1.0, w)
    assert math.isclose(check.mean, 2.0 * math.pi * w, rel_tol=1e-12)


def test_constant_mean_random_series(rng: np.random.Generator, gauss64: QuadratureRule) -> None:
    coeffs = {degree: float(rng.normal()) for degree in range(0, 9, 2)}
    U = legendre_potential(coeffs)
    check = check_constant_mean(U, gauss64)
    assert check.deviation <= 1e-12 * max(1.0, max(abs(c) for c in coeffs.values()))
    assert math.isclose(check.mean, U.half_sphere_integral(), rel_tol=1e-12, abs_tol=1e-12)


def test_azimuthal_average_addition_theorem(rng: np.random.Generator) -> None:
    U = legendre_potential({2: 1.0})
    u = rng.random(5)
    v = rng.random(5)
    expected = (1.5 * u**2 - 0.5) * (1.5 * v**2 - 0.5)
    assert np.allclose(azimuthal_average(U, u, v), expected, atol=1e-14)


def test_project_kernel_recovers_series(gauss64: QuadratureRule) -> None:
    potential, residual = project_kernel(lambda x: 1.5 * (1.0 - x**2), gauss64)
    assert math.isclose(potential.coefficient(0), 1.0, rel_tol=1e-13)
    assert math.isclose(potential.coefficient(2), -1.0, rel_tol=1e-13)
    assert all(abs(potential.coefficient(d)) < 1e-13 for d in range(4, 17, 2))
    assert residual < 1e-13


def test_project_kernel_smooth_function(gauss64: QuadratureRule) -> None:
    potential, residual = project_kernel(lambda x: np.exp(x**2), gauss64)
    assert residual < 1e-8
    assert potential.max_degree == 16


def test_effective_potential_uniform(gauss64: QuadratureRule) -> None:
    U = maier_saupe(1.5)
    field = effective_potential(U, OrientationDensity.uniform(gauss64))
    assert np.allclose(field.values, 1.5, atol=1e-14)
    assert field.legendre_moments[0] == 1.0
    assert abs(field.legendre_moments[2]) < 1e-15
    assert not field.has_unique_minimum()


def test_effective_potential_prolate(gauss64: QuadratureRule) -> None:
    U = maier_saupe(1.0)
    nu = OrientationDensity.prolate(gauss64)
    field = effective_potential(U, nu)
    moment = nu.moment(2)
    assert moment > 0.0
    assert np.allclose(field.values, 1.0 - moment * (1.5 * gauss64.nodes**2 - 0.5), atol=1e-14)
    assert np.allclose(field.at(gauss64.nodes), field.values, atol=1e-14)
    assert field.has_unique_minimum()


def test_effective_potential_identity_for_random_densities(
    ms: AxisymmetricPotential,
    gauss64: QuadratureRule,
    rng: np.random.Generator,
) -> None:
    table_p2 = 1.5 * gauss64.nodes**2 - 0.5
    for _ in range(50):
        nu = OrientationDensity.from_values(gauss64, rng.uniform(0.05, 1.0, gauss64.order))
        field = effective_potential(ms, nu)
        expected = 1.0 - nu.moment(2) * table_p2
        assert np.max(np.abs(field.values - expected)) <= 1e-12


def test_effective_potential_has_no_dips_between_nodes(
    gauss64: QuadratureRule,
    rng: np.random.Generator,
) -> None:
    dense = np.linspace(0.0, 1.0, 10 * gauss64.order)
    series = legendre_potential({0: 0.3, 2: -1.0, 4: -0.5})
    for strength in (-6.0, -2.0, 2.0, 6.0):
        nu = OrientationDensity.from_values(gauss64, np.exp(strength * gauss64.nodes**2))
        field = effective_potential(maier_saupe(1.0), nu)
        assert np.min(field.values) >= np.min(field.at(dense)) - 1e-14
        assert field.has_unique_minimum(points=10 * gauss64.order)
        general = effective_potential(series, nu)
        assert np.max(np.abs(general.at(gauss64.nodes) - general.values)) <= 1e-13
    for _ in range(20):
        nu = OrientationDensity.from_values(gauss64, rng.uniform(0.05, 1.0, gauss64.order))
        field = effective_potential(maier_saupe(1.0), nu)
        assert np.min(field.values) >= np.min(field.at(dense)) - 1e-14
        if abs(nu.moment(2)) > 1e-4:
            assert field.has_unique_minimum(points=10 * gauss64.order)


def test_kernel_depends_on_cos_squared_only(rng: np.random.Generator) -> None:
    cos_gamma = rng.uniform(0.0, 1.0, 200)
    for U in (maier_saupe(1.0), legendre_potential({0: 0.3, 2: -1.0, 4: -0.5, 6: 0.3, 8: -0.2})):
        assert np.max(np.abs(U.evaluate(cos_gamma) - U.evaluate(-cos_gamma))) <= 1e-14
    for _ in range(20):
        coeffs = {degree: float(rng.normal()) for degree in range(0, 17, 2)}
        U = legendre_potential(coeffs)
        scale = 1.0 + sum(abs(value) for value in coeffs.values())
        assert np.max(np.abs(U.evaluate(cos_gamma) - U.evaluate(-cos_gamma))) <= 1e-14 * scale


def test_potential_spec_round_trip() -> None:
    spec = {"type": "legendre", "coeffs": {"0": 1.0, "2": -1.0}}
    U = potential_from_spec(spec)
    assert dict(U.coeffs) == {0: 1.0, 2: -1.0}
    assert potential_from_spec({"type": "maier-saupe", "w": 3.0}).coefficient(0) == 3.0
    assert potential_from_spec(LegendreSpec(coeffs={4: 2.0})).coefficient(4) == 2.0


def test_potential_pickles() -> None:
    U = maier_saupe(2.0)
    clone = pickle.loads(pickle.dumps(U))  # noqa: S301
    assert isinstance(clone, AxisymmetricPotential)
    assert dict(clone.coeffs) == dict(U.coeffs)
    assert clone.label == U.label


def test_constant_mean_explicit_probes() -> None:
    check = check_constant_mean(maier_saupe(1.0), gauss_rule(16), probes=[0.0, 0.5, 1.0])
    assert check.values.shape == (3,)
    assert check.constant
